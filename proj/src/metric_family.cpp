#include "wsl/metric_family.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "wsl/error.hpp"

namespace wsl::family {

namespace {

constexpr const char* kModule = "metric_family";

double gauss(double x, double c, double w) {
  const double t = (x - c) / w;
  return std::exp(-t * t);
}

// int_0^x t^k exp(-t^2) dt
double gauss_moment(int k, double x) {
  if (x == 0.0) return 0.0;
  const double a = 0.5 * (k + 1);
  const double v = 0.5 * boost::math::tgamma_lower(a, x * x);
  return (x < 0.0 && k % 2 == 0) ? -v : v;
}

}  // namespace

RadialGrid make_grid(const GridSpec& spec) {
  if (spec.origin_capped) return RadialGrid::origin_capped(spec.r_max, spec.n_points);
  if (spec.spacing == Spacing::uniform) return RadialGrid::uniform(spec.r_min, spec.r_max, spec.n_points);
  return RadialGrid::log_uniform(spec.r_min, spec.r_max, spec.n_points);
}

double default_tau(int dim) { return dim - 2.0 - 0.05; }

ConformalFactor::ConformalFactor(const MetricSpec& spec)
    : dim_(spec.dim), A_(spec.family == MetricSpec::Family::flat ? 0.0 : spec.A), bump_(spec.bump) {
  if (spec.family == MetricSpec::Family::flat) bump_.reset();
  if (bump_ && !(bump_->width > 0.0)) throw PreconditionError(kModule, "bump width must be positive");
}

// Even in r, so the potential is smooth through the centre.
double ConformalFactor::shell_density(double s) const {
  return gauss(s, bump_->center, bump_->width) + gauss(s, -bump_->center, bump_->width);
}

// Both moments are closed form: with s = c + w t the integrands become
// polynomials in t times exp(-t^2).
double ConformalFactor::shell_mass(double rho) const {
  const int m = dim_ - 1;
  const double w = bump_->width;
  if (rho <= w) {
    // The closed form cancels catastrophically near the centre.
    auto f = [&](double s) { return shell_density(s) * std::pow(s, m); };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, rho, 0);
  }
  double total = 0.0;
  for (double c : {bump_->center, -bump_->center}) {
    const double ta = -c / w, tb = (rho - c) / w;
    for (int k = 0; k <= m; ++k) {
      const double coef = boost::math::binomial_coefficient<double>(m, k) * std::pow(c, m - k) * std::pow(w, k + 1);
      if (coef != 0.0) total += coef * (gauss_moment(k, tb) - gauss_moment(k, ta));
    }
  }
  return total;
}

double ConformalFactor::outer_moment(double rho) const {
  const double w = bump_->width;
  double total = 0.0;
  for (double c : {bump_->center, -bump_->center}) {
    const double t0 = (rho - c) / w;
    total += w * c * 0.5 * std::sqrt(std::numbers::pi) * std::erfc(t0) + 0.5 * w * w * std::exp(-t0 * t0);
  }
  return total;
}

double ConformalFactor::operator()(double rho, int derivative) const {
  const double n = dim_;
  const double k = n - 2.0;
  double v = 0.0;
  switch (derivative) {
    case 0: v = (rho == 0.0 && A_ == 0.0) ? 1.0 : 1.0 + A_ * std::pow(rho, -k); break;
    case 1: v = A_ == 0.0 ? 0.0 : -k * A_ * std::pow(rho, -k - 1.0); break;
    case 2: v = A_ == 0.0 ? 0.0 : k * (k + 1.0) * A_ * std::pow(rho, -k - 2.0); break;
    default: throw PreconditionError(kModule, "conformal factor derivative order must be 0, 1 or 2");
  }
  if (!bump_ || bump_->eps == 0.0) return v;
  const double eps = bump_->eps, c = bump_->center, w = bump_->width;

  if (bump_->profile == BumpProfile::gaussian) {
    const double g = gauss(rho, c, w);
    const double t = (rho - c) / w;
    if (derivative == 0) return v + eps * g;
    if (derivative == 1) return v + eps * g * (-2.0 * t / w);
    return v + eps * g * (4.0 * t * t - 2.0) / (w * w);
  }

  // Phi' = -rho^{1-n} M(rho), Phi'' = (n-1) rho^{-n} M(rho) - density.
  if (rho == 0.0) {
    const double dens0 = shell_density(0.0);
    if (derivative == 0) return v + eps * outer_moment(0.0) / k;
    if (derivative == 1) return v;
    return v + eps * (-dens0 / n);
  }
  const double m = shell_mass(rho);
  if (derivative == 0) return v + eps * (std::pow(rho, -k) * m + outer_moment(rho)) / k;
  if (derivative == 1) return v - eps * std::pow(rho, 1.0 - n) * m;
  return v + eps * ((n - 1.0) * std::pow(rho, -n) * m - shell_density(rho));
}

radial::RadialMetric build_metric(const MetricSpec& spec) {
  if (spec.dim < 3) throw PreconditionError(kModule, "dimension must be at least 3");
  RadialGrid grid = make_grid(spec.grid);
  const double tau = spec.tau.value_or(default_tau(spec.dim));
  const bool singular = spec.family == MetricSpec::Family::schwarzschild_conformal && spec.A != 0.0;
  if (singular && grid.origin_capped()) {
    throw PreconditionError(kModule, "A r^{2-n} is singular at the centre; use a grid with r_min > 0");
  }
  const ConformalFactor u_of(spec);
  const std::size_t n = grid.size();

  if (spec.chart == Chart::conformal) {
    Samples u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = u_of(grid.r(i));
    return radial::RadialMetric::conformally_flat(std::move(grid), spec.dim, std::move(u), tau);
  }

  const double b = spec.shift;
  if (!(b > -1.0 && b < 2.0)) throw PreconditionError(kModule, "warped-chart shift must lie in (-1, 2)");
  const double power = 2.0 / (spec.dim - 2.0);
  Samples phi(n), psi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = grid.r(i);
    const double e = std::exp(-r * r);
    const double rho = r * (1.0 + b * e);
    const double drho = 1.0 + b * (1.0 - 2.0 * r * r) * e;
    const double scale = std::pow(u_of(rho), power);
    phi[i] = scale * drho;
    psi[i] = scale * rho;
  }
  return radial::RadialMetric::warped(std::move(grid), spec.dim, std::move(phi), std::move(psi), tau);
}

}  // namespace wsl::family
