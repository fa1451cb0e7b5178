#pragma once

#include <optional>
#include <span>

#include "wsl/grid.hpp"

namespace wsl {

/// Fit of v(R) = limit + coefficient * R^(-rate).
struct LimitFit {
  double limit = 0.0;
  double coefficient = 0.0;
  double rate = 0.0;
  double residual = 0.0;  ///< rms misfit of the ladder
  double error = 0.0;     ///< |limit - Aitken limit of the outer three rungs| + residual
};

/// Extrapolates a ladder of boundary values to R -> infinity. The rate is
/// free in [0.05, 8]; for each rate the linear part is a least-squares solve.
LimitFit fit_power_limit(std::span<const double> radii, std::span<const double> values);

struct DecayEstimate {
  double order = 0.0;  ///< beta with |f - limit| ~ C r^beta; -infinity for constant samples
  double limit = 0.0;
  bool decaying = true;
};

/// Least-squares slope of log|f - limit| against log r over the outer dyadic
/// window [r_max/16, r_max/2]. Without a known limit it is extrapolated first.
DecayEstimate estimate_decay_order(const RadialGrid& grid, std::span<const double> samples,
                                   std::optional<double> limit = std::nullopt);

}  // namespace wsl
