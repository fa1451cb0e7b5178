#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "wsl/grid.hpp"

/// Dirac operators on closed model spaces: the circle and the flat 2-torus
/// are discretised, the round sphere is handled through its known spectrum.
namespace wsl::dirac {

/// Spinors on an S^1 factor are periodic for `nontrivial` (spectrum of
/// -i d/dtheta on the unit circle is Z) and antiperiodic for `trivial`
/// (spectrum Z + 1/2).
enum class SpinStructure { trivial, nontrivial };

enum class Scheme { spectral, fd2, fd4 };

struct Circle {
  double length = 6.283185307179586;
  SpinStructure spin = SpinStructure::nontrivial;
};

struct FlatTorus {
  std::array<double, 2> lengths{6.283185307179586, 6.283185307179586};
  std::array<SpinStructure, 2> spin{SpinStructure::nontrivial, SpinStructure::nontrivial};
};

struct RoundSphere {
  int dim = 2;
  double radius = 1.0;
};

struct ModelSpace {
  std::variant<Circle, FlatTorus, RoundSphere> kind;
  std::size_t resolution = 32;  ///< nodes per dimension (latitudes on spheres)

  int dim() const;
  bool is_flat() const { return !std::holds_alternative<RoundSphere>(kind); }
  /// Number of grid nodes of a flat space (axis 0 varies fastest).
  std::size_t points() const;
};

/// Node coordinates of a flat space, axis 0 varying fastest.
std::vector<std::array<double, 2>> nodes(const ModelSpace& space);

/// Band-limited trigonometric polynomial with normally distributed
/// coefficients for modes |k_i| <= max_mode, scaled so sup|f| <= amplitude.
Samples random_weight(const ModelSpace& space, std::uint64_t seed, int max_mode, double amplitude);

/// f on the round sphere: the restriction of F(x) = c + b.x + x^T Q x
/// (Q symmetric) to the sphere of the given radius in R^{n+1}.
struct SphereWeight {
  double c = 0.0;
  Eigen::VectorXd b;
  Eigen::MatrixXd Q;

  static SphereWeight constant(int dim, double c);
  static SphereWeight random(int dim, std::uint64_t seed, double amplitude);
};

struct DiracOperator {
  Eigen::MatrixXcd matrix;  ///< acts on spinor fields, component-major blocks of points()
  ModelSpace space;
  Samples weight;  ///< f at the nodes (zeros for D)
  Scheme scheme = Scheme::spectral;
  int rank = 1;
};

/// D - (1/2) grad f . in the trivial frame of the flat space.
DiracOperator build_dirac(const ModelSpace& space, const Samples& f, Scheme scheme = Scheme::spectral);

/// e^{f/2} op e^{-f/2} for direction +1 (op must carry f = 0), the inverse
/// for -1 (op must carry the same f).
DiracOperator unitary_conjugate(const DiracOperator& op, const Samples& f, int direction);

struct Spectrum {
  std::vector<double> eigenvalues;  ///< ascending
  std::vector<double> residuals;    ///< ||M v - lambda v||_f / ||v||_f per eigenvalue
  Eigen::MatrixXcd vectors;         ///< columns matching `eigenvalues`
  /// Relative size of the weighted-skew part that was discarded.
  double hermitian_defect = 0.0;
};

/// The k eigenvalues of smallest magnitude. The matrix is symmetrised in the
/// weighted inner product sum psi^H phi e^{-f} dV before the Hermitian solve.
Spectrum spectrum(const DiracOperator& op, std::size_t k);

/// Weighted inner product sum psi^H phi e^{-f} dV.
std::complex<double> weighted_inner(const DiracOperator& op, const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

/// Band-limited random spinor field compatible with the spin structure.
Eigen::VectorXcd random_spinor(const ModelSpace& space, std::uint64_t seed, int max_mode);

/// max over trials of ||D_f^2 psi - (-Laplacian_f psi + R_f psi / 4)|| / ||psi||,
/// all operators applied matrix-free.
double lichnerowicz_residual(const ModelSpace& space, const Samples& f, int trials, std::uint64_t seed,
                             Scheme scheme = Scheme::spectral);

/// max over trials of ||[D_f, d_axis] psi - (1/2) Hess f(e_axis) . psi|| / ||psi||.
double ricci_identity_residual(const ModelSpace& space, const Samples& f, int axis, int trials,
                               std::uint64_t seed, Scheme scheme = Scheme::spectral);

/// R + 2 Laplacian f - |grad f|^2 at the nodes of a flat space.
Samples weighted_scalar_curvature(const ModelSpace& space, const Samples& f, Scheme scheme = Scheme::spectral);

/// R_f of the round sphere sampled on a latitude-longitude grid (n = 2) or
/// on quasi-random points (n > 2).
Samples weighted_scalar_curvature(const ModelSpace& sphere, const SphereWeight& f);

struct FriedrichCheck {
  double lhs = 0.0;  ///< lambda_min^2
  double rhs = 0.0;  ///< n / (4(n-1)) min R_f
  double margin = 0.0;
  bool equality = false;
};

FriedrichCheck friedrich_check(const ModelSpace& space, const Samples& f, double tolerance = 1e-8);
FriedrichCheck friedrich_check(const ModelSpace& sphere, const SphereWeight& f, double tolerance = 1e-8);

/// Analytic Dirac spectrum of the round sphere: +-(n/2 + k)/radius, k >= 0,
/// listed by increasing magnitude up to `count` values (with multiplicity).
std::vector<double> sphere_dirac_spectrum(const RoundSphere& sphere, std::size_t count);

/// Smallest eigenvalue of -c Laplacian + R with c = 4 (lambda_P) or
/// c = 4(n-1)/(n-2) (mu_1). `potential` overrides the constant R of the space;
/// on spheres it must be zonal, sampled at the latitude cell centres.
double lambda_p(const ModelSpace& space, const Samples& potential = {});
double mu_1(const ModelSpace& space, const Samples& potential = {});

/// Latitude cell centres used by lambda_p / mu_1 on spheres.
Samples sphere_latitudes(const ModelSpace& sphere);

}  // namespace wsl::dirac
