#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wsl {

using Samples = std::vector<double>;

enum class Spacing { uniform, log_uniform };

/// Reflection behaviour of a radial function through the origin. Only
/// meaningful on origin-capped grids; elsewhere edge stencils are one-sided.
enum class Parity { none, even, odd };

/// Finite-difference weights (Fornberg 1988) for derivatives 0..max_order at
/// `z` from arbitrary distinct nodes. Result is indexed [order][node].
std::vector<std::vector<double>> fornberg_weights(double z, std::span<const double> nodes, int max_order);

/// Radial nodes, uniform in a coordinate s: s = ln r (log_uniform) or s = r.
///
/// An origin-capped grid is the cell-centred uniform grid r_i = (i + 1/2) h
/// ending at r_max; functions on it may be reflected through r = 0 with a
/// parity, which is how regularity at a smooth centre is imposed.
class RadialGrid {
 public:
  static RadialGrid log_uniform(double r_min, double r_max, std::size_t n);
  static RadialGrid uniform(double r_min, double r_max, std::size_t n);
  static RadialGrid origin_capped(double r_max, std::size_t n);

  std::size_t size() const noexcept { return r_.size(); }
  const Samples& r() const noexcept { return r_; }
  double r(std::size_t i) const { return r_[i]; }
  double r_min() const noexcept { return r_.front(); }
  double r_max() const noexcept { return r_.back(); }
  Spacing spacing() const noexcept { return spacing_; }
  bool origin_capped() const noexcept { return origin_; }

  /// Step in the uniform coordinate s.
  double step() const noexcept { return step_; }
  double s(double r) const;
  /// dr/ds at node i (r for log grids, 1 otherwise).
  double dr_ds(std::size_t i) const;

  /// Smallest physical spacing between neighbouring nodes.
  double min_spacing() const;

  /// Same endpoints, half the step (nested for non-capped grids).
  RadialGrid refined() const;

  /// Six-point Lagrange interpolation (in s) of `f` or its r-derivative at `r`.
  double interpolate(std::span<const double> f, double r, int derivative = 0) const;

  /// Index of the node closest to r.
  std::size_t nearest(double r) const;

  bool operator==(const RadialGrid& other) const;

 private:
  RadialGrid(Samples r, Spacing spacing, bool origin, double step);

  Samples r_;
  Spacing spacing_;
  bool origin_;
  double step_;
};

/// Fourth-order derivatives in s (central interior, one-sided or reflected at edges).
Samples d_ds(const RadialGrid& grid, std::span<const double> f, Parity parity = Parity::none);
Samples d2_ds2(const RadialGrid& grid, std::span<const double> f, Parity parity = Parity::none);

/// Fourth-order radial derivatives d/dr and d^2/dr^2.
Samples d_dr(const RadialGrid& grid, std::span<const double> f, Parity parity = Parity::none);
Samples d2_dr2(const RadialGrid& grid, std::span<const double> f, Parity parity = Parity::none);

}  // namespace wsl
