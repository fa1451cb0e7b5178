#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wsl/metric_family.hpp"
#include "wsl/weight_mass.hpp"
#include "wsl/witten.hpp"

using namespace wsl;

namespace {

family::MetricSpec schwarzschild(double A, int n = 3) {
  family::MetricSpec s;
  s.family = family::MetricSpec::Family::schwarzschild_conformal;
  s.dim = n;
  s.A = A;
  s.grid.n_points = 8192;
  return s;
}

family::MetricSpec bump(double A, double eps, double center, double width) {
  family::MetricSpec s = schwarzschild(A);
  s.bump = family::Bump{eps, center, width, family::BumpProfile::potential};
  if (A == 0.0) s.grid.r_min = 0.05;
  return s;
}

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(WittenSpinor, FlatSpaceGivesTheConstantSpinor) {
  family::MetricSpec s;
  s.grid.n_points = 1024;
  const auto metric = family::build_metric(s);
  const auto spinor = witten::witten_spinor(metric, witten::unit_spinor(3));
  for (double a : spinor.amplitude) EXPECT_DOUBLE_EQ(a, 1.0);
  EXPECT_LE(spinor.dirac_residual, 1e-12);
  const auto zero = radial::WeightField::zero(metric.grid());
  EXPECT_LE(std::abs(witten::witten_energy(metric, zero, spinor).value), 1e-8);
}

TEST(WittenSpinor, UnitSpinorsAreNormalised) {
  for (int n = 2; n <= 6; ++n) {
    const auto psi0 = witten::unit_spinor(n, 1);
    EXPECT_NEAR(psi0.norm(), 1.0, 1e-15);
    EXPECT_EQ(psi0.size(), 1 << (n / 2));
  }
}

TEST(WittenEnergy, SchwarzschildEnergyIsTheAdmMass) {
  for (int n : {3, 4}) {
    family::MetricSpec s = schwarzschild(1.0, n);
    if (n == 4) s.grid.r_max = 1e4;
    const auto metric = family::build_metric(s);
    const auto spinor = witten::witten_spinor(metric, witten::unit_spinor(n));
    EXPECT_LE(spinor.dirac_residual, 1e-4);
    const auto zero = radial::WeightField::zero(metric.grid());
    const double energy = witten::witten_energy(metric, zero, spinor).value;
    EXPECT_LE(relative(energy, 4.0 * (n - 1.0) * radial::unit_sphere_area(n)), 1e-2) << n;
  }
}

TEST(WittenEnergy, ZeroWeightMatchesTheUnweightedSpinor) {
  const auto metric = family::build_metric(schwarzschild(0.5));
  const auto psi0 = witten::unit_spinor(3);
  const auto plain = witten::witten_spinor(metric, psi0);
  const auto weighted = witten::weighted_witten_spinor(metric, radial::WeightField::zero(metric.grid()), psi0);
  for (std::size_t i = 0; i < plain.amplitude.size(); ++i) EXPECT_DOUBLE_EQ(plain.amplitude[i], weighted.amplitude[i]);
}

TEST(WittenEnergy, CanonicalWeightOnBumpsReproducesTheWeightedMass) {
  for (const auto& s : {bump(0.5, 0.2, 2.0, 0.5), bump(0.0, 0.3, 1.5, 0.4), bump(1.0, 0.15, 3.0, 0.8)}) {
    const auto metric = family::build_metric(s);
    const auto weight = mass::solve_weight(metric);
    const auto spinor = witten::weighted_witten_spinor(metric, weight, witten::unit_spinor(3));
    EXPECT_TRUE(spinor.weighted);
    EXPECT_LE(spinor.dirac_residual, 1e-4);
    const double energy = witten::witten_energy(metric, weight, spinor).value;
    const double mf = mass::weighted_mass(metric, weight).value;
    EXPECT_GE(mf, -1e-6);
    EXPECT_LE(relative(energy, mf), 1e-2) << s.A << " " << s.bump->eps;
  }
}

TEST(Kato, GapIsNonnegative) {
  const auto metric = family::build_metric(bump(0.5, 0.2, 2.0, 0.5));
  const auto weight = mass::solve_weight(metric);
  const auto spinor = witten::weighted_witten_spinor(metric, weight, witten::unit_spinor(3));
  for (double g : witten::kato_gap(metric, spinor)) EXPECT_GE(g, -1e-10);
}

TEST(WittenSpinor, ApproachesTheConstantSpinorAtTheMassOrder) {
  const auto metric = family::build_metric(schwarzschild(1.0));
  const auto spinor = witten::witten_spinor(metric, witten::unit_spinor(3));
  EXPECT_NEAR(std::abs(spinor.decay_order), 1.0, 0.05);
}
