#include "wsl/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "wsl/error.hpp"

namespace wsl {

std::vector<std::vector<double>> fornberg_weights(double z, std::span<const double> nodes, int max_order) {
  const std::size_t n = nodes.size();
  const auto m = static_cast<std::size_t>(max_order);
  std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k) {
          c[i][k] = c1 * (static_cast<double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) {
        c[j][k] = (c4 * c[j][k] - static_cast<double>(k) * c[j][k - 1]) / c3;
      }
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<std::vector<double>> out(m + 1, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k <= m; ++k) out[k][i] = c[i][k];
  }
  return out;
}

namespace {

// Unit-spacing stencils: 5-point central and 6-point one-sided at the first
// two nodes. Both are fourth order for first and second derivatives.
struct Stencils {
  std::array<std::array<double, 5>, 2> central{};
  std::array<std::array<std::array<double, 6>, 2>, 2> edge{};  // [node 0/1][order]

  Stencils() {
    const std::array<double, 5> c_nodes{-2, -1, 0, 1, 2};
    auto w = fornberg_weights(0.0, c_nodes, 2);
    for (int k = 0; k < 2; ++k) {
      std::copy_n(w[k + 1].begin(), 5, central[k].begin());
      annihilate_constants(central[k]);
    }
    const std::array<double, 6> e_nodes{0, 1, 2, 3, 4, 5};
    for (int node = 0; node < 2; ++node) {
      auto we = fornberg_weights(node, e_nodes, 2);
      for (int k = 0; k < 2; ++k) {
        std::copy_n(we[k + 1].begin(), 6, edge[node][k].begin());
        annihilate_constants(edge[node][k]);
      }
    }
  }

  // Summed in stencil order the weights cancel exactly, so a constant has a
  // derivative of exactly zero instead of roundoff amplified by 1/h^2.
  template <std::size_t N>
  static void annihilate_constants(std::array<double, N>& w) {
    double partial = 0.0;
    for (std::size_t k = 0; k + 1 < N; ++k) partial += w[k];
    w[N - 1] = -partial;
  }
};

const Stencils& stencils() {
  static const Stencils s;
  return s;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError("radial_grid", what);
}

// order 0 -> d/ds, 1 -> d2/ds2
Samples derivative_s(const RadialGrid& grid, std::span<const double> f, Parity parity, int order) {
  const std::size_t n = grid.size();
  require(f.size() == n, "sample count does not match grid");
  const auto& st = stencils();
  const double scale = order == 0 ? 1.0 / grid.step() : 1.0 / (grid.step() * grid.step());
  Samples out(n);
  const bool reflect = grid.origin_capped() && parity != Parity::none;
  const double sign = parity == Parity::odd ? -1.0 : 1.0;

  auto at = [&](std::ptrdiff_t i) -> double {
    if (i >= 0) return f[static_cast<std::size_t>(i)];
    return sign * f[static_cast<std::size_t>(-i - 1)];
  };

  // Weights sum to zero, so differencing against f[i] changes nothing in exact
  // arithmetic but scales the roundoff with the local variation, not |f|.
  const auto& c = st.central[order];
  for (std::size_t i = 0; i < n; ++i) {
    const auto si = static_cast<std::ptrdiff_t>(i);
    const bool left_edge = i < 2 && !reflect;
    const bool right_edge = i + 2 >= n;
    const double fi = f[i];
    double acc = 0.0;
    if (left_edge) {
      const auto& e = st.edge[i][order];
      for (std::size_t k = 0; k < 6; ++k) acc += e[k] * (f[k] - fi);
    } else if (right_edge) {
      const std::size_t node = n - 1 - i;
      const auto& e = st.edge[node][order];
      const double flip = order == 0 ? -1.0 : 1.0;
      for (std::size_t k = 0; k < 6; ++k) acc += flip * e[k] * (f[n - 1 - k] - fi);
    } else {
      for (std::ptrdiff_t k = -2; k <= 2; ++k) acc += c[static_cast<std::size_t>(k + 2)] * (at(si + k) - fi);
    }
    out[i] = acc * scale;
  }
  return out;
}

}  // namespace

RadialGrid::RadialGrid(Samples r, Spacing spacing, bool origin, double step)
    : r_(std::move(r)), spacing_(spacing), origin_(origin), step_(step) {}

RadialGrid RadialGrid::log_uniform(double r_min, double r_max, std::size_t n) {
  require(r_min > 0.0, "log-uniform grid needs r_min > 0");
  require(r_max > r_min, "r_max must exceed r_min");
  require(n >= 64, "grid needs at least 64 points");
  const double step = std::log(r_max / r_min) / static_cast<double>(n - 1);
  Samples r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = r_min * std::exp(step * static_cast<double>(i));
  r.back() = r_max;
  return RadialGrid(std::move(r), Spacing::log_uniform, false, step);
}

RadialGrid RadialGrid::uniform(double r_min, double r_max, std::size_t n) {
  require(r_min >= 0.0, "uniform grid needs r_min >= 0");
  require(r_max > r_min, "r_max must exceed r_min");
  require(n >= 64, "grid needs at least 64 points");
  const double step = (r_max - r_min) / static_cast<double>(n - 1);
  Samples r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = r_min + step * static_cast<double>(i);
  r.back() = r_max;
  return RadialGrid(std::move(r), Spacing::uniform, false, step);
}

RadialGrid RadialGrid::origin_capped(double r_max, std::size_t n) {
  require(r_max > 0.0, "r_max must be positive");
  require(n >= 64, "grid needs at least 64 points");
  const double step = r_max / (static_cast<double>(n) - 0.5);
  Samples r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = (static_cast<double>(i) + 0.5) * step;
  r.back() = r_max;
  return RadialGrid(std::move(r), Spacing::uniform, true, step);
}

double RadialGrid::s(double r) const { return spacing_ == Spacing::log_uniform ? std::log(r) : r; }

double RadialGrid::dr_ds(std::size_t i) const { return spacing_ == Spacing::log_uniform ? r_[i] : 1.0; }

double RadialGrid::min_spacing() const {
  double h = r_[1] - r_[0];
  for (std::size_t i = 1; i + 1 < r_.size(); ++i) h = std::min(h, r_[i + 1] - r_[i]);
  return h;
}

RadialGrid RadialGrid::refined() const {
  if (origin_) return origin_capped(r_max(), 2 * size());
  if (spacing_ == Spacing::log_uniform) return log_uniform(r_min(), r_max(), 2 * size() - 1);
  return uniform(r_min(), r_max(), 2 * size() - 1);
}

std::size_t RadialGrid::nearest(double r) const {
  auto it = std::lower_bound(r_.begin(), r_.end(), r);
  if (it == r_.end()) return size() - 1;
  auto i = static_cast<std::size_t>(it - r_.begin());
  if (i > 0 && std::abs(r_[i - 1] - r) < std::abs(r_[i] - r)) --i;
  return i;
}

double RadialGrid::interpolate(std::span<const double> f, double r, int derivative) const {
  require(f.size() == size(), "sample count does not match grid");
  require(r >= r_min() && r <= r_max(), "interpolation point outside grid");
  require(derivative >= 0 && derivative <= 2, "interpolation derivative order must be 0..2");
  const std::size_t i = nearest(r);
  std::size_t lo = i >= 3 ? i - 3 : 0;
  lo = std::min(lo, size() - 6);
  std::array<double, 6> nodes{};
  for (std::size_t k = 0; k < 6; ++k) nodes[k] = s(r_[lo + k]);
  const auto w = fornberg_weights(s(r), nodes, derivative);
  // chain rule from s to r on log grids
  std::array<double, 3> ds{};
  for (int k = 0; k <= derivative; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < 6; ++j) acc += w[k][j] * f[lo + j];
    ds[k] = acc;
  }
  if (derivative == 0 || spacing_ == Spacing::uniform) return ds[derivative];
  if (derivative == 1) return ds[1] / r;
  return (ds[2] - ds[1]) / (r * r);
}

bool RadialGrid::operator==(const RadialGrid& other) const {
  return spacing_ == other.spacing_ && origin_ == other.origin_ && size() == other.size() &&
         std::abs(r_min() - other.r_min()) <= 1e-12 * r_min() && std::abs(r_max() - other.r_max()) <= 1e-12 * r_max();
}

Samples d_ds(const RadialGrid& grid, std::span<const double> f, Parity parity) {
  return derivative_s(grid, f, parity, 0);
}

Samples d2_ds2(const RadialGrid& grid, std::span<const double> f, Parity parity) {
  return derivative_s(grid, f, parity, 1);
}

Samples d_dr(const RadialGrid& grid, std::span<const double> f, Parity parity) {
  Samples d = d_ds(grid, f, parity);
  if (grid.spacing() == Spacing::log_uniform) {
    for (std::size_t i = 0; i < d.size(); ++i) d[i] /= grid.r(i);
  }
  return d;
}

Samples d2_dr2(const RadialGrid& grid, std::span<const double> f, Parity parity) {
  Samples d2 = d2_ds2(grid, f, parity);
  if (grid.spacing() == Spacing::log_uniform) {
    const Samples d1 = d_ds(grid, f, parity);
    for (std::size_t i = 0; i < d2.size(); ++i) d2[i] = (d2[i] - d1[i]) / (grid.r(i) * grid.r(i));
  }
  return d2;
}

}  // namespace wsl
