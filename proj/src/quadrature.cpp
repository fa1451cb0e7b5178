#include "wsl/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wsl/error.hpp"

namespace wsl {

namespace {

struct PowerTail {
  double tail = 0.0;
  double error = 0.0;
};

// Least-squares slope of ln|F| against ln r over r in [r_max/4, r_max].
PowerTail power_tail(const RadialGrid& grid, std::span<const double> f) {
  const std::size_t n = grid.size();
  const double r_last = grid.r_max();
  const double f_last = f[n - 1];
  double scale = 0.0;
  for (double v : f) scale = std::max(scale, std::abs(v));
  if (scale == 0.0 || std::abs(f_last) <= 1e-15 * scale) return {};

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  bool sign_change = false;
  for (std::size_t i = n; i-- > 0;) {
    if (grid.r(i) < 0.25 * r_last) break;
    if (f[i] * f_last <= 0.0) {
      sign_change = true;
      break;
    }
    const double x = std::log(grid.r(i));
    const double y = std::log(std::abs(f[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (sign_change || m < 3) {
    // No clean power law; bound the tail by one e-fold of the last value.
    return {0.0, std::abs(f_last) * r_last};
  }
  const double mm = static_cast<double>(m);
  const double slope = (mm * sxy - sx * sy) / (mm * sxx - sx * sx);
  if (slope >= -1.0) {
    throw NumericalError("quadrature", "integrand decays like r^" + std::to_string(slope) +
                                           " at the outer edge; tail integral diverges");
  }
  const double tail = -f_last * r_last / (slope + 1.0);
  // Sensitivity of the tail to a 5% error in the exponent.
  const double err = std::abs(tail) * 0.05 * std::abs(slope) / std::abs(slope + 1.0);
  return {tail, err};
}

}  // namespace

RadialIntegral integrate_radial(const RadialGrid& grid, std::span<const double> integrand, bool with_tail) {
  const std::size_t n = grid.size();
  if (integrand.size() != n) throw PreconditionError("quadrature", "sample count does not match grid");

  // Gregory weights: 3/8, 7/6, 23/24, 1, ..., 1, 23/24, 7/6, 3/8
  static constexpr double edge[3] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double w = 1.0;
    if (i < 3) w = edge[i];
    else if (n - 1 - i < 3) w = edge[n - 1 - i];
    acc += w * integrand[i] * grid.dr_ds(i);
  }
  RadialIntegral out;
  out.value = acc * grid.step();

  if (grid.origin_capped()) {
    const double f0 = integrand[0], f1 = integrand[1];
    const double r0 = grid.r(0), r1 = grid.r(1);
    if (f0 != 0.0) {
      double p = 0.0;
      if (f0 * f1 > 0.0) p = std::log(f1 / f0) / std::log(r1 / r0);
      out.value += p > -1.0 ? f0 * r0 / (p + 1.0) : 0.5 * f0 * r0;
    }
  }

  if (with_tail) {
    const PowerTail t = power_tail(grid, integrand);
    out.tail = t.tail;
    out.tail_error = t.error;
    out.value += t.tail;
  }
  return out;
}

Samples cumulative_integral(const RadialGrid& grid, std::span<const double> integrand) {
  const std::size_t n = grid.size();
  if (integrand.size() != n) throw PreconditionError("quadrature", "sample count does not match grid");
  Samples g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = integrand[i] * grid.dr_ds(i);
  const double h = grid.step();
  Samples out(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double piece;
    if (i == 0) {
      piece = (9 * g[0] + 19 * g[1] - 5 * g[2] + g[3]) / 24.0;
    } else if (i + 2 >= n) {
      piece = (9 * g[i + 1] + 19 * g[i] - 5 * g[i - 1] + g[i - 2]) / 24.0;
    } else {
      piece = (-g[i - 1] + 13 * g[i] + 13 * g[i + 1] - g[i + 2]) / 24.0;
    }
    out[i + 1] = out[i] + piece * h;
  }
  return out;
}

}  // namespace wsl
