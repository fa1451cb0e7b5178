#pragma once

#include <span>

#include "wsl/grid.hpp"

namespace wsl {

struct RadialIntegral {
  double value = 0.0;       ///< grid part + origin cap + tail
  double tail = 0.0;        ///< analytic power-law estimate of the part beyond r_max
  double tail_error = 0.0;  ///< uncertainty of the tail estimate
};

/// Integral of F(r) dr from the inner edge of the grid to infinity.
///
/// Grid part: Gregory end-corrected trapezoid in s (fourth order). On
/// origin-capped grids the sliver [0, r_min] is added from a local power
/// fit. The tail assumes |F| ~ C r^p over the outer dyadic window and throws
/// NumericalError when p >= -1 (divergent).
RadialIntegral integrate_radial(const RadialGrid& grid, std::span<const double> integrand, bool with_tail = true);

/// Running integral from r_min to each node, fourth order in s.
Samples cumulative_integral(const RadialGrid& grid, std::span<const double> integrand);

}  // namespace wsl
