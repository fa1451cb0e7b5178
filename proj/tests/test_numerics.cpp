#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wsl/error.hpp"
#include "wsl/extrapolation.hpp"
#include "wsl/grid.hpp"
#include "wsl/quadrature.hpp"

using namespace wsl;

namespace {

double max_error(const RadialGrid& g, const Samples& got, double (*exact)(double)) {
  double e = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) e = std::max(e, std::abs(got[i] - exact(g.r(i))));
  return e;
}

double f0(double r) { return std::sin(r) * std::exp(-0.1 * r); }
double f1(double r) { return std::exp(-0.1 * r) * (std::cos(r) - 0.1 * std::sin(r)); }
double f2(double r) { return std::exp(-0.1 * r) * (-0.2 * std::cos(r) - 0.99 * std::sin(r)); }

Samples sample(const RadialGrid& g, double (*f)(double)) {
  Samples out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = f(g.r(i));
  return out;
}

}  // namespace

TEST(Fornberg, ReproducesClassicalStencils) {
  const double nodes[] = {-1.0, 0.0, 1.0};
  const auto w = fornberg_weights(0.0, nodes, 2);
  EXPECT_NEAR(w[1][0], -0.5, 1e-15);
  EXPECT_NEAR(w[1][2], 0.5, 1e-15);
  EXPECT_NEAR(w[2][0], 1.0, 1e-15);
  EXPECT_NEAR(w[2][1], -2.0, 1e-15);
}

TEST(Derivatives, FourthOrderOnUniformAndLogGrids) {
  for (Spacing sp : {Spacing::uniform, Spacing::log_uniform}) {
    double prev1 = 0.0, prev2 = 0.0;
    for (std::size_t n : {201u, 401u, 801u}) {
      const RadialGrid g = sp == Spacing::uniform ? RadialGrid::uniform(0.5, 10.0, n) : RadialGrid::log_uniform(0.5, 10.0, n);
      const Samples f = sample(g, f0);
      const double e1 = max_error(g, d_dr(g, f), f1);
      const double e2 = max_error(g, d2_dr2(g, f), f2);
      if (prev1 > 0.0) {
        EXPECT_GT(std::log2(prev1 / e1), 3.5);
        EXPECT_GT(std::log2(prev2 / e2), 3.3);
      }
      prev1 = e1;
      prev2 = e2;
    }
  }
}

TEST(Derivatives, ParityReflectionAtTheOrigin) {
  const RadialGrid g = RadialGrid::origin_capped(4.0, 400);
  Samples even(g.size()), odd(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    even[i] = std::cos(g.r(i));
    odd[i] = std::sin(g.r(i));
  }
  const Samples de = d_dr(g, even, Parity::even);
  const Samples d2o = d2_dr2(g, odd, Parity::odd);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_NEAR(de[i], -std::sin(g.r(i)), 1e-9);
    EXPECT_NEAR(d2o[i], -std::sin(g.r(i)), 1e-8);
  }
}

TEST(Grid, RefinementIsNestedAndInterpolationIsAccurate) {
  const RadialGrid g = RadialGrid::log_uniform(0.1, 100.0, 257);
  const RadialGrid h = g.refined();
  ASSERT_EQ(h.size(), 513u);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_DOUBLE_EQ(h.r(2 * i), g.r(i));
  EXPECT_EQ(g.nearest(g.r(17) * 1.0001), 17u);

  auto interp_error = [](const RadialGrid& grid, int derivative) {
    const Samples f = sample(grid, f0);
    double e = 0.0;
    for (double r : {0.37, 2.2, 15.5, 55.5})
      e = std::max(e, std::abs(grid.interpolate(f, r, derivative) - (derivative == 0 ? f0(r) : f1(r))));
    return e;
  };
  const RadialGrid fine = h.refined();
  EXPECT_GT(std::log2(interp_error(h, 0) / interp_error(fine, 0)), 3.5);
  EXPECT_GT(std::log2(interp_error(h, 1) / interp_error(fine, 1)), 3.0);
  EXPECT_LT(interp_error(fine, 0), 1e-6);
}

TEST(Grid, RejectsDegenerateInput) {
  EXPECT_THROW(RadialGrid::log_uniform(-1.0, 10.0, 100), PreconditionError);
  EXPECT_THROW(RadialGrid::uniform(1.0, 1.0, 100), PreconditionError);
  EXPECT_THROW(RadialGrid::uniform(0.0, 1.0, 3), PreconditionError);
}

TEST(Quadrature, PowerLawTailIsAddedAnalytically) {
  // int_{r_min}^inf r^2 (1 + r^2)^{-5/2} dr = (1/3) (1 + r_min^{-2})^{-3/2} ... evaluated in closed form
  const RadialGrid g = RadialGrid::log_uniform(0.01, 1e3, 4096);
  Samples F(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) F[i] = std::pow(g.r(i), 2) * std::pow(1.0 + g.r(i) * g.r(i), -2.5);
  const auto I = integrate_radial(g, F);
  auto antideriv = [](double r) { return std::pow(r, 3) / (3.0 * std::pow(1.0 + r * r, 1.5)); };
  const double exact = 1.0 / 3.0 - antideriv(0.01);
  EXPECT_NEAR(I.value, exact, 1e-9);
  EXPECT_GT(I.tail, 0.0);
  EXPECT_LE(std::abs(I.value - exact), I.tail_error + 1e-9);
}

TEST(Quadrature, OriginCapIncludesTheSliver) {
  auto error = [](std::size_t n) {
    const RadialGrid g = RadialGrid::origin_capped(20.0, n);
    Samples F(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) F[i] = 4.0 * std::numbers::pi * g.r(i) * g.r(i) * std::exp(-g.r(i) * g.r(i));
    return std::abs(integrate_radial(g, F).value - std::pow(std::numbers::pi, 1.5));
  };
  const double coarse = error(1000), fine = error(2000);
  EXPECT_LT(fine, 1e-8);
  EXPECT_GT(std::log2(coarse / fine), 3.5);
}

TEST(Quadrature, DivergentTailIsRejected) {
  const RadialGrid g = RadialGrid::log_uniform(1.0, 1e4, 1024);
  Samples F(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) F[i] = 1.0 / std::sqrt(g.r(i));
  EXPECT_THROW(integrate_radial(g, F), NumericalError);
}

TEST(Quadrature, CumulativeIntegralMatchesAntiderivative) {
  auto error = [](std::size_t n) {
    const RadialGrid g = RadialGrid::log_uniform(0.5, 20.0, n);
    const Samples c = cumulative_integral(g, sample(g, f1));
    double e = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) e = std::max(e, std::abs(c[i] - (f0(g.r(i)) - f0(0.5))));
    return e;
  };
  const double coarse = error(1024), fine = error(2048);
  EXPECT_LT(fine, 1e-8);
  EXPECT_GT(std::log2(coarse / fine), 3.5);
}

TEST(Extrapolation, RecoversPowerLawLimit) {
  const double radii[] = {625.0, 1250.0, 2500.0, 5000.0};
  double values[4];
  for (int k = 0; k < 4; ++k) values[k] = 3.0 + 2.0 * std::pow(radii[k], -1.3);
  const LimitFit fit = fit_power_limit(radii, values);
  EXPECT_NEAR(fit.limit, 3.0, 1e-10);
  EXPECT_NEAR(fit.rate, 1.3, 1e-4);
  EXPECT_LT(fit.error, 1e-9);
}

TEST(Extrapolation, DecayOrderOfKnownProfile) {
  const RadialGrid g = RadialGrid::log_uniform(0.1, 1e5, 2048);
  Samples f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = 1.0 + 0.7 * std::pow(g.r(i), -1.5);
  const DecayEstimate known = estimate_decay_order(g, f, 1.0);
  EXPECT_NEAR(known.order, -1.5, 1e-6);
  const DecayEstimate free = estimate_decay_order(g, f);
  EXPECT_NEAR(free.limit, 1.0, 1e-8);
  EXPECT_NEAR(free.order, -1.5, 1e-2);
}
