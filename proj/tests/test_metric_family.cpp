#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wsl/error.hpp"
#include "wsl/metric_family.hpp"

using namespace wsl;

namespace {

family::MetricSpec bumped(int n, double A, double eps, family::BumpProfile profile) {
  family::MetricSpec s;
  s.family = family::MetricSpec::Family::schwarzschild_conformal;
  s.dim = n;
  s.A = A;
  s.bump = family::Bump{eps, 2.0, 0.5, profile};
  return s;
}

}  // namespace

TEST(ConformalFactor, DerivativesAgreeWithFiniteDifferences) {
  for (int n : {3, 4, 5}) {
    for (auto profile : {family::BumpProfile::gaussian, family::BumpProfile::potential}) {
      const family::ConformalFactor u(bumped(n, 0.7, 0.3, profile));
      const double h = 1e-4;
      for (double rho : {0.3, 1.1, 1.9, 2.4, 5.0}) {
        const double d1 = (u(rho - 2 * h) - 8 * u(rho - h) + 8 * u(rho + h) - u(rho + 2 * h)) / (12 * h);
        const double d2 = (u(rho - h, 1) - u(rho + h, 1)) / (-2 * h);
        EXPECT_NEAR(u(rho, 1), d1, 1e-8 * (1 + std::abs(d1))) << n << " " << rho;
        EXPECT_NEAR(u(rho, 2), d2, 1e-6 * (1 + std::abs(d2))) << n << " " << rho;
      }
    }
  }
}

TEST(ConformalFactor, PotentialBumpIsSuperharmonic) {
  // Flat Laplacian of the bump part is minus a nonnegative shell density.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> r(0.05, 8.0);
  for (int n : {3, 4, 6}) {
    const family::ConformalFactor u(bumped(n, 0.0, 0.4, family::BumpProfile::potential));
    for (int k = 0; k < 200; ++k) {
      const double rho = r(rng);
      EXPECT_LE(u(rho, 2) + (n - 1.0) / rho * u(rho, 1), 1e-12);
    }
    // Outside the shell the bump is a multiple of the fundamental solution.
    EXPECT_NEAR((u(20.0) - 1.0) / (u(40.0) - 1.0), std::pow(2.0, n - 2.0), 1e-6);
  }
}

TEST(ConformalFactor, PotentialProfileHasNonnegativeScalarCurvature) {
  const auto metric = family::build_metric(bumped(3, 0.5, 0.3, family::BumpProfile::potential));
  const auto R = radial::curvature(metric).R;
  for (double v : R) EXPECT_GE(v, -1e-6);
}

TEST(MetricFamily, RejectsInvalidSpecs) {
  family::MetricSpec s = bumped(3, 1.0, 0.0, family::BumpProfile::gaussian);
  s.grid.origin_capped = true;
  EXPECT_THROW(family::build_metric(s), PreconditionError);
  s = bumped(2, 0.0, 0.0, family::BumpProfile::gaussian);
  EXPECT_THROW(family::build_metric(s), PreconditionError);
  s = bumped(3, 0.5, 0.1, family::BumpProfile::gaussian);
  s.chart = family::Chart::warped;
  s.shift = 2.5;
  EXPECT_THROW(family::build_metric(s), PreconditionError);
  s.shift = 0.0;
  s.bump->width = 0.0;
  EXPECT_THROW(family::build_metric(s), PreconditionError);
}

TEST(MetricFamily, DefaultDecayOrderIsBelowTheMassOrder) {
  for (int n = 3; n <= 10; ++n) {
    EXPECT_LT(family::default_tau(n), n - 2.0);
    EXPECT_GT(family::default_tau(n), (n - 2.0) / 2.0);
  }
}
