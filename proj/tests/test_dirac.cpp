#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wsl/dirac.hpp"
#include "wsl/error.hpp"

using namespace wsl;
using dirac::Scheme;
using dirac::SpinStructure;

namespace {

constexpr double kPi = std::numbers::pi;

dirac::ModelSpace circle(std::size_t n, SpinStructure spin = SpinStructure::nontrivial) {
  return {dirac::Circle{2.0 * kPi, spin}, n};
}

dirac::ModelSpace torus(std::size_t n, std::array<SpinStructure, 2> spin = {SpinStructure::nontrivial,
                                                                             SpinStructure::nontrivial},
                        std::array<double, 2> lengths = {2.0 * kPi, 2.0 * kPi}) {
  return {dirac::FlatTorus{lengths, spin}, n};
}

dirac::ModelSpace sphere(int n, double radius = 1.0) { return {dirac::RoundSphere{n, radius}, 64}; }

Samples cos_weight(const dirac::ModelSpace& space, double a, int axis) {
  Samples f;
  for (const auto& x : dirac::nodes(space)) f.push_back(a * std::cos(x[axis]));
  return f;
}

std::vector<double> sorted_abs(std::vector<double> v) {
  for (double& x : v) x = std::abs(x);
  std::sort(v.begin(), v.end());
  return v;
}

double max_pairwise(const std::vector<double>& a, const std::vector<double>& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

}  // namespace

TEST(DiracSpectrum, CircleSpinStructures) {
  // periodic spinors give Z, antiperiodic give Z + 1/2
  const auto p = dirac::spectrum(dirac::build_dirac(circle(64), Samples(64, 0.0)), 5).eigenvalues;
  const std::vector<double> zp = {-2.0, -1.0, 0.0, 1.0, 2.0};
  EXPECT_LE(max_pairwise(p, zp), 1e-12);
  const auto a = dirac::spectrum(dirac::build_dirac(circle(64, SpinStructure::trivial), Samples(64, 0.0)), 4)
                     .eigenvalues;
  const std::vector<double> za = {-1.5, -0.5, 0.5, 1.5};
  EXPECT_LE(max_pairwise(a, za), 1e-12);
}

TEST(DiracSpectrum, TorusMatchesTheDualLattice) {
  const auto space = torus(12, {SpinStructure::trivial, SpinStructure::nontrivial}, {2.0 * kPi, 4.0 * kPi});
  const auto spec = dirac::spectrum(dirac::build_dirac(space, Samples(space.points(), 0.0)), 12);
  std::vector<double> oracle;
  for (int a = -6; a <= 6; ++a)
    for (int b = -6; b <= 6; ++b) {
      const double m = std::hypot(a + 0.5, 0.5 * b);
      oracle.push_back(m);
      oracle.push_back(m);
    }
  std::sort(oracle.begin(), oracle.end());
  oracle.resize(12);
  EXPECT_LE(max_pairwise(sorted_abs(spec.eigenvalues), oracle), 1e-10);
  for (double r : spec.residuals) EXPECT_LE(r, 1e-10);
}

TEST(DiracSpectrum, WeightedOperatorIsIsospectral) {
  for (double a : {0.1, 1.0}) {
    const auto space = circle(128);
    const auto D = dirac::spectrum(dirac::build_dirac(space, Samples(128, 0.0)), 9).eigenvalues;
    const auto Df = dirac::spectrum(dirac::build_dirac(space, cos_weight(space, a, 0)), 9).eigenvalues;
    EXPECT_LE(max_pairwise(D, Df), 1e-8) << a;
  }
  const auto space = torus(12);
  const Samples f = dirac::random_weight(space, 5, 2, 0.5);
  const auto D = dirac::spectrum(dirac::build_dirac(space, Samples(space.points(), 0.0)), 10).eigenvalues;
  const auto Df = dirac::spectrum(dirac::build_dirac(space, f), 10).eigenvalues;
  EXPECT_LE(max_pairwise(sorted_abs(D), sorted_abs(Df)), 1e-8);
}

TEST(DiracSpectrum, ConjugationAgreesSpectrallyWithTheDirectOperator) {
  // e^{f/2} is not band-limited, so the match is spectral in the resolution.
  const auto space = torus(16);
  const Samples f = dirac::random_weight(space, 9, 2, 0.6);
  const auto D = dirac::build_dirac(space, Samples(space.points(), 0.0));
  const auto direct = dirac::build_dirac(space, f);
  const auto conj = dirac::unitary_conjugate(D, f, +1);
  EXPECT_LE(max_pairwise(dirac::spectrum(direct, 10).eigenvalues, dirac::spectrum(conj, 10).eigenvalues), 1e-8);
  const auto back = dirac::unitary_conjugate(conj, f, -1);
  EXPECT_LE((back.matrix - D.matrix).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_THROW(dirac::unitary_conjugate(direct, f, +1), PreconditionError);
}

TEST(DiracOperator, SelfAdjointInTheWeightedProductOnSmoothSpinors) {
  // The products e^{-f} psi must be resolved on the grid.
  const auto space = torus(32);
  const Samples f = dirac::random_weight(space, 2, 3, 0.8);
  const auto op = dirac::build_dirac(space, f);
  for (std::uint64_t s = 0; s < 3; ++s) {
    const Eigen::VectorXcd a = dirac::random_spinor(space, 10 + s, 4);
    const Eigen::VectorXcd b = dirac::random_spinor(space, 20 + s, 4);
    const auto lhs = dirac::weighted_inner(op, op.matrix * a, b);
    const auto rhs = dirac::weighted_inner(op, a, op.matrix * b);
    EXPECT_LE(std::abs(lhs - rhs), 1e-12 * std::abs(lhs));
  }
}

TEST(Lichnerowicz, SpectralIdentityOnTorusAndCircle) {
  const auto t = torus(32);
  EXPECT_LE(dirac::lichnerowicz_residual(t, dirac::random_weight(t, 1, 3, 0.7), 3, 4), 1e-9);
  const auto c = circle(128);
  EXPECT_LE(dirac::lichnerowicz_residual(c, cos_weight(c, 1.0, 0), 3, 4), 1e-9);
}

TEST(Lichnerowicz, FiniteDifferenceResidualConvergesAtSchemeOrder) {
  for (auto [scheme, order] : {std::pair{Scheme::fd2, 2.0}, std::pair{Scheme::fd4, 4.0}}) {
    double prev = 0.0;
    for (std::size_t n : {32u, 64u, 128u}) {
      const auto c = circle(n);
      const double r = dirac::lichnerowicz_residual(c, cos_weight(c, 0.5, 0), 2, 7, scheme);
      if (prev > 0.0) EXPECT_NEAR(std::log2(prev / r), order, 0.3) << n;
      prev = r;
    }
  }
}

TEST(RicciIdentity, BothAxesOnTheTorus) {
  const auto t = torus(32, {SpinStructure::trivial, SpinStructure::nontrivial});
  const Samples f = dirac::random_weight(t, 8, 3, 0.7);
  for (int axis : {0, 1}) EXPECT_LE(dirac::ricci_identity_residual(t, f, axis, 3, 2), 1e-9);
}

TEST(RicciIdentity, DirectionTransverseToTheWeightCommutes) {
  // f = f(x): Hess f(e_y) = 0, so D_f commutes with d_y.
  const auto t = torus(24);
  EXPECT_LE(dirac::ricci_identity_residual(t, cos_weight(t, 0.9, 0), 1, 2, 3), 1e-12);
}

TEST(RicciIdentity, WrongHessianIsDetected) {
  // The identity residual of an fd2 operator is visibly nonzero: the test can fail.
  const auto t = torus(16);
  EXPECT_GT(dirac::ricci_identity_residual(t, dirac::random_weight(t, 8, 3, 0.7), 0, 2, 2, Scheme::fd2), 1e-4);
}

TEST(Friedrich, FlatTorusWithRandomWeights) {
  const auto t = torus(16);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto fc = dirac::friedrich_check(t, dirac::random_weight(t, seed, 2, 0.5));
    EXPECT_GE(fc.margin, -1e-8) << seed;
  }
  EXPECT_NEAR(dirac::lambda_p(torus(32)), 0.0, 1e-12);
}

TEST(Friedrich, RoundSphereWithConstantWeightIsSharp) {
  for (int n : {2, 3, 4}) {
    const auto fc = dirac::friedrich_check(sphere(n), dirac::SphereWeight::constant(n, 0.7));
    EXPECT_LE(std::abs(fc.margin), 1e-10) << n;
    EXPECT_TRUE(fc.equality);
    EXPECT_NEAR(fc.lhs, n * n / 4.0, 1e-12);
  }
}

TEST(Friedrich, RoundSphereWithRandomWeight) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto fc = dirac::friedrich_check(sphere(2), dirac::SphereWeight::random(2, seed, 0.5));
    EXPECT_GE(fc.margin, -1e-8);
  }
}

TEST(YamabeBounds, SphereValuesAndOrdering) {
  for (int n : {2, 3, 4}) {
    const auto s = sphere(n, 2.0);
    const double R = n * (n - 1.0) / 4.0;
    EXPECT_NEAR(dirac::lambda_p(s), R, 1e-8);
    const double lambda_min = dirac::sphere_dirac_spectrum({n, 2.0}, 1)[0];
    EXPECT_GE(lambda_min * lambda_min, n / (4.0 * (n - 1.0)) * dirac::lambda_p(s) - 1e-10);
    if (n >= 3) EXPECT_GE(dirac::mu_1(s), dirac::lambda_p(s) - 1e-10);
  }
  EXPECT_THROW(dirac::mu_1(sphere(2)), PreconditionError);
}

TEST(YamabeBounds, ZonalPotentialRaisesMuAboveLambda) {
  const auto s = sphere(3);
  const Samples theta = dirac::sphere_latitudes(s);
  Samples V;
  for (double t : theta) V.push_back(6.0 + std::cos(t));
  EXPECT_GE(dirac::mu_1(s, V), dirac::lambda_p(s, V) - 1e-10);
}

TEST(SphereSpectrum, MultiplicitiesFollowTheBinomialCount) {
  // S^2: |lambda| = 1 + k with multiplicity 2 (k + 1) per sign
  const auto s2 = sorted_abs(dirac::sphere_dirac_spectrum({2, 1.0}, 16));
  EXPECT_EQ(std::count(s2.begin(), s2.end(), 1.0), 4);
  EXPECT_EQ(std::count(s2.begin(), s2.end(), 2.0), 8);
  // S^3: |lambda| = 3/2 + k with multiplicity (k + 1)(k + 2) per sign
  const auto s3 = sorted_abs(dirac::sphere_dirac_spectrum({3, 1.0}, 16));
  EXPECT_EQ(std::count(s3.begin(), s3.end(), 1.5), 4);
  EXPECT_EQ(std::count(s3.begin(), s3.end(), 2.5), 12);
}
