#include "wsl/radial_geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "wsl/error.hpp"
#include "wsl/quadrature.hpp"

namespace wsl::radial {

namespace {

constexpr const char* kModule = "radial_geometry";

void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError(kModule, what);
}

void require_positive(std::span<const double> v, const char* name) {
  for (double x : v) {
    require(std::isfinite(x) && x > 0.0, std::string(name) + " must be positive and finite everywhere");
  }
}

void require_same_grid(const RadialMetric& metric, const WeightField& weight) {
  require(metric.grid() == weight.grid(), "metric and weight live on different grids");
}

// First derivative in arclength s (ds = phi dr) and the second derivative.
struct ArclengthDerivatives {
  Samples d1, d2;
};

ArclengthDerivatives arclength_derivatives(const RadialGrid& grid, const WarpedProduct& wp,
                                           const Samples& phi_r, std::span<const double> f, Parity parity) {
  const Samples f_r = d_dr(grid, f, parity);
  const Samples f_rr = d2_dr2(grid, f, parity);
  ArclengthDerivatives out{Samples(f.size()), Samples(f.size())};
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double p = wp.phi[i];
    out.d1[i] = f_r[i] / p;
    out.d2[i] = f_rr[i] / (p * p) - f_r[i] * phi_r[i] / (p * p * p);
  }
  return out;
}

struct WarpedFrame {
  WarpedProduct wp;
  Samples phi_r;
  ArclengthDerivatives psi;
};

WarpedFrame frame_of(const RadialMetric& metric) {
  WarpedFrame fr{metric.as_warped(), {}, {}};
  const RadialGrid& grid = metric.grid();
  const std::size_t n = grid.size();
  // psi = r q: differentiate q only and apply the product rule exactly, since
  // r itself is not polynomial in a log coordinate. q is phi in the conformal
  // chart, where phi - 1 is formed without cancellation.
  Samples q(n), q_r, q_rr;
  if (metric.is_conformally_flat()) {
    const auto& u = metric.conformal().u;
    const double p = 2.0 / (metric.dim() - 2.0);
    for (std::size_t i = 0; i < n; ++i) q[i] = std::expm1(p * std::log1p(u[i] - 1.0));
    fr.phi_r = d_dr(grid, q, Parity::even);
    q_r = fr.phi_r;
    q_rr = d2_dr2(grid, q, Parity::even);
    for (std::size_t i = 0; i < n; ++i) q[i] = fr.wp.phi[i];
  } else {
    fr.phi_r = d_dr(grid, fr.wp.phi, Parity::even);
    for (std::size_t i = 0; i < n; ++i) q[i] = fr.wp.psi[i] / grid.r(i);
    q_r = d_dr(grid, q, Parity::even);
    q_rr = d2_dr2(grid, q, Parity::even);
  }
  fr.psi = {Samples(n), Samples(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = fr.wp.phi[i], r = grid.r(i);
    const double psi_r = q[i] + r * q_r[i];
    const double psi_rr = 2.0 * q_r[i] + r * q_rr[i];
    fr.psi.d1[i] = psi_r / phi;
    fr.psi.d2[i] = psi_rr / (phi * phi) - psi_r * fr.phi_r[i] / (phi * phi * phi);
  }
  return fr;
}

void fill_weighted(const RadialMetric& metric, const WarpedFrame& fr, std::span<const double> f,
                   CurvatureProfile& out) {
  const std::size_t n = f.size();
  const double dim = metric.dim();
  const auto fd = arclength_derivatives(metric.grid(), fr.wp, fr.phi_r, f, Parity::even);
  out.hess_f_rad.resize(n);
  out.hess_f_sph.resize(n);
  out.R_f.resize(n);
  out.ric_f_rad.resize(n);
  out.ric_f_sph.resize(n);
  out.einstein_f_rad.resize(n);
  out.einstein_f_sph.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mean_curv = fr.psi.d1[i] / fr.wp.psi[i];
    out.hess_f_rad[i] = fd.d2[i];
    out.hess_f_sph[i] = mean_curv * fd.d1[i];
    const double lap = fd.d2[i] + (dim - 1.0) * mean_curv * fd.d1[i];
    out.R_f[i] = out.R[i] + 2.0 * lap - fd.d1[i] * fd.d1[i];
    out.ric_f_rad[i] = out.ric_rad[i] + out.hess_f_rad[i];
    out.ric_f_sph[i] = out.ric_sph[i] + out.hess_f_sph[i];
    out.einstein_f_rad[i] = out.ric_f_rad[i] - 0.5 * out.R_f[i];
    out.einstein_f_sph[i] = out.ric_f_sph[i] - 0.5 * out.R_f[i];
  }
}

CurvatureProfile unweighted(const RadialMetric& metric, const WarpedFrame& fr) {
  const std::size_t n = metric.grid().size();
  const double dim = metric.dim();
  CurvatureProfile out;
  out.R.resize(n);
  out.ric_rad.resize(n);
  out.ric_sph.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double psi = fr.wp.psi[i];
    const double ps = fr.psi.d1[i], pss = fr.psi.d2[i];
    out.ric_rad[i] = -(dim - 1.0) * pss / psi;
    out.ric_sph[i] = -pss / psi + (dim - 2.0) * (1.0 - ps * ps) / (psi * psi);
    out.R[i] = out.ric_rad[i] + (dim - 1.0) * out.ric_sph[i];
  }
  return out;
}

// Local six-point Lagrange interpolation on arbitrary increasing nodes.
double lagrange_at(std::span<const double> x, std::span<const double> y, double z) {
  const std::size_t n = x.size();
  auto it = std::lower_bound(x.begin(), x.end(), z);
  std::size_t i = static_cast<std::size_t>(it - x.begin());
  std::size_t lo = i >= 3 ? i - 3 : 0;
  lo = std::min(lo, n - 6);
  const auto w = fornberg_weights(z, x.subspan(lo, 6), 0);
  double acc = 0.0;
  for (std::size_t k = 0; k < 6; ++k) acc += w[0][k] * y[lo + k];
  return acc;
}

}  // namespace

RadialMetric::RadialMetric(RadialGrid grid, int dim, std::variant<ConformallyFlat, WarpedProduct> chart, double tau)
    : grid_(std::move(grid)), dim_(dim), chart_(std::move(chart)), tau_(tau) {
  require(dim_ >= 3, "dimension must be at least 3");
  require(tau_ > 0.5 * (dim_ - 2), "decay order tau must exceed (n-2)/2");
  if (const auto* c = std::get_if<ConformallyFlat>(&chart_)) {
    require(c->u.size() == grid_.size(), "conformal factor sample count does not match grid");
    require_positive(c->u, "conformal factor u");
  } else {
    const auto& w = std::get<WarpedProduct>(chart_);
    require(w.phi.size() == grid_.size() && w.psi.size() == grid_.size(),
            "warped-product sample count does not match grid");
    require_positive(w.phi, "phi");
    require_positive(w.psi, "psi");
  }
}

RadialMetric RadialMetric::conformally_flat(RadialGrid grid, int dim, Samples u, double tau) {
  return RadialMetric(std::move(grid), dim, ConformallyFlat{std::move(u)}, tau);
}

RadialMetric RadialMetric::warped(RadialGrid grid, int dim, Samples phi, Samples psi, double tau) {
  return RadialMetric(std::move(grid), dim, WarpedProduct{std::move(phi), std::move(psi)}, tau);
}

const ConformallyFlat& RadialMetric::conformal() const {
  const auto* c = std::get_if<ConformallyFlat>(&chart_);
  require(c != nullptr, "metric is not in the conformally flat chart");
  return *c;
}

const WarpedProduct& RadialMetric::warped() const {
  const auto* w = std::get_if<WarpedProduct>(&chart_);
  require(w != nullptr, "metric is not in the warped-product chart");
  return *w;
}

WarpedProduct RadialMetric::as_warped() const {
  if (const auto* w = std::get_if<WarpedProduct>(&chart_)) return *w;
  const auto& u = std::get<ConformallyFlat>(chart_).u;
  WarpedProduct out{Samples(u.size()), Samples(u.size())};
  const double p = 2.0 / (dim_ - 2.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    out.phi[i] = std::pow(u[i], p);
    out.psi[i] = grid_.r(i) * out.phi[i];
  }
  return out;
}

WeightField::WeightField(RadialGrid grid, Samples f, Samples w)
    : grid_(std::move(grid)), f_(std::move(f)), w_(std::move(w)), delta_(0.0) {
  require(f_.size() == grid_.size(), "weight sample count does not match grid");
  require_positive(w_, "w = exp(-f/2)");
  delta_ = estimate_decay_order(grid_, f_, 0.0).order;
}

WeightField WeightField::from_f(RadialGrid grid, Samples f) {
  Samples w(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) w[i] = std::exp(-0.5 * f[i]);
  return WeightField(std::move(grid), std::move(f), std::move(w));
}

WeightField WeightField::from_w(RadialGrid grid, Samples w) {
  require_positive(w, "w");
  Samples f(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) f[i] = -2.0 * std::log(w[i]);
  return WeightField(std::move(grid), std::move(f), std::move(w));
}

WeightField WeightField::zero(RadialGrid grid) {
  const std::size_t n = grid.size();
  return WeightField(std::move(grid), Samples(n, 0.0), Samples(n, 1.0));
}

double unit_sphere_area(int n) {
  const double half = 0.5 * n;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

CurvatureProfile curvature(const RadialMetric& metric) {
  const WarpedFrame fr = frame_of(metric);
  CurvatureProfile out = unweighted(metric, fr);
  fill_weighted(metric, fr, Samples(metric.grid().size(), 0.0), out);
  return out;
}

CurvatureProfile curvature(const RadialMetric& metric, const WeightField& weight) {
  require_same_grid(metric, weight);
  const WarpedFrame fr = frame_of(metric);
  CurvatureProfile out = unweighted(metric, fr);
  fill_weighted(metric, fr, weight.f(), out);
  return out;
}

Samples weighted_scalar_curvature(const RadialMetric& metric, const WeightField& weight) {
  return curvature(metric, weight).R_f;
}

Samples laplacian(const RadialMetric& metric, std::span<const double> u) {
  require(u.size() == metric.grid().size(), "sample count does not match grid");
  const WarpedFrame fr = frame_of(metric);
  const auto ud = arclength_derivatives(metric.grid(), fr.wp, fr.phi_r, u, Parity::even);
  Samples out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] = ud.d2[i] + (metric.dim() - 1.0) * fr.psi.d1[i] / fr.wp.psi[i] * ud.d1[i];
  }
  return out;
}

Samples weighted_laplacian(const RadialMetric& metric, const WeightField& weight, std::span<const double> u) {
  require_same_grid(metric, weight);
  Samples out = laplacian(metric, u);
  const auto wp = metric.as_warped();
  const Samples u_r = d_dr(metric.grid(), u, Parity::even);
  const Samples f_r = d_dr(metric.grid(), weight.f(), Parity::even);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= f_r[i] * u_r[i] / (wp.phi[i] * wp.phi[i]);
  return out;
}

Samples gradient_norm_sq(const RadialMetric& metric, std::span<const double> u) {
  require(u.size() == metric.grid().size(), "sample count does not match grid");
  const auto wp = metric.as_warped();
  Samples out = d_dr(metric.grid(), u, Parity::even);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] * out[i] / (wp.phi[i] * wp.phi[i]);
  return out;
}

Samples volume_density(const RadialMetric& metric) {
  const auto wp = metric.as_warped();
  const double area = unit_sphere_area(metric.dim());
  Samples out(wp.phi.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = area * wp.phi[i] * std::pow(wp.psi[i], metric.dim() - 1);
  return out;
}

Samples weighted_divergence(const RadialMetric& metric, const WeightField& weight, std::span<const double> rad,
                            std::span<const double> sph) {
  require_same_grid(metric, weight);
  const std::size_t n = metric.grid().size();
  require(rad.size() == n && sph.size() == n, "tensor sample count does not match grid");
  const WarpedFrame fr = frame_of(metric);
  const Samples rad_r = d_dr(metric.grid(), rad, Parity::even);
  const Samples f_r = d_dr(metric.grid(), weight.f(), Parity::even);
  Samples out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = fr.wp.phi[i];
    const double mean_curv = fr.psi.d1[i] / fr.wp.psi[i];
    out[i] = rad_r[i] / phi + (metric.dim() - 1.0) * mean_curv * (rad[i] - sph[i]) - rad[i] * f_r[i] / phi;
  }
  return out;
}

Samples weighted_bianchi_residual(const RadialMetric& metric, const WeightField& weight) {
  const CurvatureProfile c = curvature(metric, weight);
  return weighted_divergence(metric, weight, c.einstein_f_rad, c.einstein_f_sph);
}

Samples isothermal_radius(const RadialMetric& metric) {
  const auto& wp = metric.warped();
  const RadialGrid& grid = metric.grid();
  const std::size_t n = grid.size();
  Samples excess(n);
  for (std::size_t i = 0; i < n; ++i) excess[i] = wp.phi[i] / wp.psi[i] - 1.0 / grid.r(i);
  const Samples running = cumulative_integral(grid, excess);
  double tail = 0.0;
  try {
    tail = integrate_radial(grid, excess, true).tail;
  } catch (const NumericalError& e) {
    throw NumericalError(kModule, std::string("isothermal radius: ") + e.what());
  }
  const double total = running.back() + tail;
  Samples rho(n);
  for (std::size_t i = 0; i < n; ++i) {
    rho[i] = grid.r(i) * std::exp(-(total - running[i]));
    if (!std::isfinite(rho[i])) throw NumericalError(kModule, "isothermal radius integration produced a non-finite value");
    if (i > 0 && !(rho[i] > rho[i - 1])) throw NumericalError(kModule, "isothermal radius is not monotone");
  }
  return rho;
}

RadialMetric to_isothermal(const RadialMetric& metric) {
  if (metric.is_conformally_flat()) return metric;
  const auto& wp = metric.warped();
  const Samples rho = isothermal_radius(metric);
  const std::size_t n = rho.size();
  const double expo = (metric.dim() - 2.0) / 2.0;
  Samples log_rho(n), u_at(n);
  for (std::size_t i = 0; i < n; ++i) {
    log_rho[i] = std::log(rho[i]);
    u_at[i] = std::pow(wp.psi[i] / rho[i], expo);
  }
  RadialGrid target = RadialGrid::log_uniform(rho.front(), rho.back(), n);
  Samples u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = lagrange_at(log_rho, u_at, std::log(target.r(i)));
  u.front() = u_at.front();
  u.back() = u_at.back();
  return RadialMetric::conformally_flat(std::move(target), metric.dim(), std::move(u), metric.decay_order());
}

RadialMetric to_warped(const RadialMetric& metric) {
  if (!metric.is_conformally_flat()) return metric;
  auto wp = metric.as_warped();
  return RadialMetric::warped(metric.grid(), metric.dim(), std::move(wp.phi), std::move(wp.psi), metric.decay_order());
}

double check_asymptotics(const RadialMetric& metric) {
  const RadialGrid& grid = metric.grid();
  double slowest;
  if (metric.is_conformally_flat()) {
    slowest = estimate_decay_order(grid, metric.conformal().u, 1.0).order;
  } else {
    const auto& wp = metric.warped();
    Samples ratio(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) ratio[i] = wp.psi[i] / grid.r(i);
    slowest = std::max(estimate_decay_order(grid, wp.phi, 1.0).order, estimate_decay_order(grid, ratio, 1.0).order);
  }
  if (slowest > -metric.decay_order() + 0.1) {
    throw PreconditionError(kModule, "metric approaches flat like r^" + std::to_string(slowest) +
                                         ", slower than the declared order tau = " +
                                         std::to_string(metric.decay_order()));
  }
  return slowest;
}

}  // namespace wsl::radial
