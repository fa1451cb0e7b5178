#pragma once

#include <span>
#include <variant>

#include "wsl/extrapolation.hpp"
#include "wsl/grid.hpp"

/// Rotationally symmetric metrics on (a radial slab of) R^n, their curvature,
/// and the weighted (Bakry-Emery / P-scalar) curvature quantities.
///
/// Sign conventions: the Laplacian is div grad (non-positive on closed
/// manifolds), and the round unit sphere S^n has R = n(n-1).
namespace wsl::radial {

/// g = u^{4/(n-2)} (dr^2 + r^2 g_sphere)
struct ConformallyFlat {
  Samples u;
};

/// g = phi^2 dr^2 + psi^2 g_sphere
struct WarpedProduct {
  Samples phi;
  Samples psi;
};

class RadialMetric {
 public:
  static RadialMetric conformally_flat(RadialGrid grid, int dim, Samples u, double tau);
  static RadialMetric warped(RadialGrid grid, int dim, Samples phi, Samples psi, double tau);

  int dim() const noexcept { return dim_; }
  double decay_order() const noexcept { return tau_; }
  const RadialGrid& grid() const noexcept { return grid_; }

  bool is_conformally_flat() const noexcept { return std::holds_alternative<ConformallyFlat>(chart_); }
  const ConformallyFlat& conformal() const;
  const WarpedProduct& warped() const;

  /// (phi, psi) of either chart; for the conformal chart phi = u^{2/(n-2)}, psi = r phi.
  WarpedProduct as_warped() const;

 private:
  RadialMetric(RadialGrid grid, int dim, std::variant<ConformallyFlat, WarpedProduct> chart, double tau);

  RadialGrid grid_;
  int dim_;
  std::variant<ConformallyFlat, WarpedProduct> chart_;
  double tau_;
};

/// Radial weight f with w = exp(-f/2).
class WeightField {
 public:
  static WeightField from_f(RadialGrid grid, Samples f);
  static WeightField from_w(RadialGrid grid, Samples w);
  static WeightField zero(RadialGrid grid);

  const RadialGrid& grid() const noexcept { return grid_; }
  const Samples& f() const noexcept { return f_; }
  const Samples& w() const noexcept { return w_; }
  /// Estimated decay order of f towards 0 (-infinity for f == 0).
  double decay_order() const noexcept { return delta_; }

 private:
  WeightField(RadialGrid grid, Samples f, Samples w);

  RadialGrid grid_;
  Samples f_;
  Samples w_;
  double delta_;
};

/// Orthonormal-frame eigenvalues of the curvature tensors: `_rad` along
/// d/dr, `_sph` on each of the n-1 sphere directions.
struct CurvatureProfile {
  Samples R;
  Samples ric_rad, ric_sph;
  Samples hess_f_rad, hess_f_sph;
  Samples R_f;
  Samples ric_f_rad, ric_f_sph;
  Samples einstein_f_rad, einstein_f_sph;  ///< Ric_f - (R_f / 2) g
};

/// Area of the unit sphere S^{n-1} in R^n.
double unit_sphere_area(int n);

CurvatureProfile curvature(const RadialMetric& metric);
CurvatureProfile curvature(const RadialMetric& metric, const WeightField& weight);

/// R + 2 Laplacian(f) - |grad f|^2
Samples weighted_scalar_curvature(const RadialMetric& metric, const WeightField& weight);

Samples laplacian(const RadialMetric& metric, std::span<const double> u);
/// Laplacian(u) - <grad f, grad u>
Samples weighted_laplacian(const RadialMetric& metric, const WeightField& weight, std::span<const double> u);

/// |grad u|^2 for a radial function.
Samples gradient_norm_sq(const RadialMetric& metric, std::span<const double> u);

/// dV/dr = |S^{n-1}| phi psi^{n-1}.
Samples volume_density(const RadialMetric& metric);

/// Radial component of div_f(T) = div T - T(grad f, .) for a diagonal
/// symmetric tensor T = diag(rad, sph, ..., sph) in the orthonormal frame.
Samples weighted_divergence(const RadialMetric& metric, const WeightField& weight, std::span<const double> rad,
                            std::span<const double> sph);

/// Radial component of div_f(E_f).
Samples weighted_bianchi_residual(const RadialMetric& metric, const WeightField& weight);

/// Re-expresses a warped metric in isothermal form. The isothermal radius
/// solves d(ln rho)/dr = phi/psi with rho/r -> 1 at infinity; u is resampled
/// onto a log-uniform grid spanning [rho(r_min), rho(r_max)].
RadialMetric to_isothermal(const RadialMetric& metric);

/// Warped form of a conformally flat metric on the same grid.
RadialMetric to_warped(const RadialMetric& metric);

/// Isothermal radius rho(r) at the nodes of a warped metric (see to_isothermal).
Samples isothermal_radius(const RadialMetric& metric);

/// Checks that the metric approaches the flat one at the outer edge at least
/// like r^{-tau}; returns the estimated decay order of the slowest component.
double check_asymptotics(const RadialMetric& metric);

}  // namespace wsl::radial
