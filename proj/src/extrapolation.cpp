#include "wsl/extrapolation.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "wsl/error.hpp"

namespace wsl {

namespace {

struct LinearFit {
  double c0 = 0.0, c1 = 0.0, sse = 0.0;
};

LinearFit solve_linear(std::span<const double> radii, std::span<const double> values, double rate) {
  const std::size_t n = radii.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::pow(radii[i], -rate);
    sx += x[i];
    sy += values[i];
    sxx += x[i] * x[i];
    sxy += x[i] * values[i];
  }
  const double nn = static_cast<double>(n);
  const double det = nn * sxx - sx * sx;
  LinearFit fit;
  if (std::abs(det) <= 1e-300) {
    fit.c0 = sy / nn;
  } else {
    fit.c1 = (nn * sxy - sx * sy) / det;
    fit.c0 = (sy - fit.c1 * sx) / nn;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double e = values[i] - fit.c0 - fit.c1 * x[i];
    fit.sse += e * e;
  }
  return fit;
}

LimitFit fit_once(std::span<const double> radii, std::span<const double> values) {
  constexpr double lo = 0.05, hi = 8.0;
  constexpr int coarse = 96;
  const double step = (hi - lo) / coarse;
  double best_rate = lo;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= coarse; ++k) {
    const double rate = lo + step * k;
    const double sse = solve_linear(radii, values, rate).sse;
    if (sse < best_sse) {
      best_sse = sse;
      best_rate = rate;
    }
  }
  const double a = std::max(lo, best_rate - step);
  const double b = std::min(hi, best_rate + step);
  auto objective = [&](double rate) { return solve_linear(radii, values, rate).sse; };
  const auto [rate, sse] = boost::math::tools::brent_find_minima(objective, a, b, 48);
  const LinearFit lin = solve_linear(radii, values, rate);
  LimitFit out;
  out.limit = lin.c0;
  out.coefficient = lin.c1;
  out.rate = rate;
  out.residual = std::sqrt(sse / static_cast<double>(radii.size()));
  return out;
}

}  // namespace

LimitFit fit_power_limit(std::span<const double> radii, std::span<const double> values) {
  if (radii.size() != values.size() || radii.size() < 3) {
    throw PreconditionError("extrapolation", "ladder needs at least three (R, value) pairs");
  }
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double spread = *mx - *mn;
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  if (spread <= 1e-13 * scale || spread == 0.0) {
    LimitFit flat;
    flat.limit = values.back();
    flat.residual = spread;
    flat.error = spread;
    flat.rate = std::numeric_limits<double>::infinity();
    return flat;
  }
  LimitFit fit = fit_once(radii, values);
  const std::size_t n = radii.size();
  double outer_limit = fit.limit;
  if (n > 3) {
    outer_limit = fit_once(radii.subspan(n - 3), values.subspan(n - 3)).limit;
  }
  fit.error = std::abs(fit.limit - outer_limit) + fit.residual;
  return fit;
}

DecayEstimate estimate_decay_order(const RadialGrid& grid, std::span<const double> samples,
                                   std::optional<double> limit) {
  if (samples.size() != grid.size()) throw PreconditionError("extrapolation", "sample count does not match grid");
  const double lo = grid.r_max() / 16.0, hi = grid.r_max() / 2.0;
  std::vector<double> r, v;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.r(i) >= lo && grid.r(i) <= hi) {
      r.push_back(grid.r(i));
      v.push_back(samples[i]);
    }
  }
  if (r.size() < 3) throw PreconditionError("extrapolation", "outer dyadic window holds fewer than three nodes");

  DecayEstimate est;
  est.limit = limit ? *limit : fit_power_limit(r, v).limit;
  double scale = std::max(std::abs(est.limit), 1e-300);
  for (double x : v) scale = std::max(scale, std::abs(x));

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double d = std::abs(v[i] - est.limit);
    if (d <= 1e-14 * scale) continue;
    const double x = std::log(r[i]), y = std::log(d);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 3) {
    est.order = -std::numeric_limits<double>::infinity();
    return est;
  }
  const double mm = static_cast<double>(m);
  est.order = (mm * sxy - sx * sy) / (mm * sxx - sx * sx);
  est.decaying = est.order < 0.0;
  return est;
}

}  // namespace wsl
