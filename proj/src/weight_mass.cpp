#include "wsl/weight_mass.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "wsl/error.hpp"
#include "wsl/quadrature.hpp"

namespace wsl::mass {

namespace {

constexpr const char* kModule = "weight_mass";

// `floor` is an absolute error the ladder may carry without being declared
// divergent (roundoff drift, or a scale the limit is only added to).
FluxLimit extrapolate(const RadialGrid& grid, const Samples& profile, const char* what, double floor) {
  FluxLimit out;
  std::vector<double> radii, values;
  for (std::size_t i : ladder_nodes(grid)) {
    out.ladder.push_back({grid.r(i), profile[i]});
    radii.push_back(grid.r(i));
    values.push_back(profile[i]);
  }
  out.fit = fit_power_limit(radii, values);
  out.value = out.fit.limit;
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  if (!std::isfinite(out.value) || out.fit.error > 1e-2 * scale + floor + 1e-12) {
    std::ostringstream msg;
    msg << what << " ladder does not converge (fit error " << out.fit.error << "):";
    for (const auto& s : out.ladder) msg << " (" << s.radius << ", " << s.value << ")";
    throw NumericalError(kModule, msg.str());
  }
  return out;
}

const radial::RadialMetric& isothermal(const radial::RadialMetric& metric, std::optional<radial::RadialMetric>& slot) {
  if (metric.is_conformally_flat()) return metric;
  slot.emplace(radial::to_isothermal(metric));
  return *slot;
}

}  // namespace

std::vector<std::size_t> ladder_nodes(const RadialGrid& grid) {
  std::vector<std::size_t> nodes;
  for (double frac : {1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0, 1.0 / 2.0}) {
    const std::size_t i = grid.nearest(grid.r_max() * frac);
    if (i == 0 || i + 1 >= grid.size() || (!nodes.empty() && i <= nodes.back())) {
      throw PreconditionError(kModule, "grid too coarse to resolve the outer dyadic ladder");
    }
    nodes.push_back(i);
  }
  return nodes;
}

FluxLimit adm_mass(const radial::RadialMetric& metric) {
  if (!metric.is_conformally_flat()) {
    throw PreconditionError(kModule, "ADM mass needs the conformally flat chart; convert with to_isothermal first");
  }
  const RadialGrid& grid = metric.grid();
  const int n = metric.dim();
  const auto& u = metric.conformal().u;
  // Differentiate U - 1 rather than U: a constant near 1 carries roundoff
  // that the stencil amplifies by 1/(r h), which is large at the ladder.
  Samples U(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) U[i] = std::expm1(4.0 / (n - 2.0) * std::log1p(u[i] - 1.0));
  const Samples dU = d_dr(grid, U, Parity::even);
  const double area = radial::unit_sphere_area(n);
  Samples profile(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) profile[i] = (1.0 - n) * dU[i] * area * std::pow(grid.r(i), n - 1);
  // A relative drift of U at a thousand ulps, slowly varying in r, already
  // produces a flux of this size at the outer rung.
  const double outer = grid.r(ladder_nodes(grid).back());
  double u_max = 0.0;
  for (double x : U) u_max = std::max(u_max, std::abs(1.0 + x));
  const double floor = 1e3 * std::numeric_limits<double>::epsilon() * (n - 1.0) * area * std::pow(outer, n - 2) * u_max;
  return extrapolate(grid, profile, "ADM mass", floor);
}

Samples weight_flux_profile(const radial::RadialMetric& metric, const radial::WeightField& weight) {
  if (!(metric.grid() == weight.grid())) throw PreconditionError(kModule, "metric and weight live on different grids");
  const auto wp = metric.as_warped();
  const Samples f_r = d_dr(metric.grid(), weight.f(), Parity::even);
  const double area = radial::unit_sphere_area(metric.dim());
  Samples out(f_r.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 2.0 * f_r[i] / wp.phi[i] * std::exp(-weight.f()[i]) * area * std::pow(wp.psi[i], metric.dim() - 1);
  }
  return out;
}

WeightedMass weighted_mass(const radial::RadialMetric& metric, const radial::WeightField& weight) {
  std::optional<radial::RadialMetric> slot;
  WeightedMass out;
  out.adm = adm_mass(isothermal(metric, slot));

  const Samples profile = weight_flux_profile(metric, weight);
  // the flux only matters next to m, so it converges when it is small against either
  out.flux = extrapolate(metric.grid(), profile, "weight flux", 1e-2 * std::abs(out.adm.value));
  out.value = out.adm.value + out.flux.value;

  const Samples lap_f = radial::weighted_laplacian(metric, weight, weight.f());
  const Samples dv = radial::volume_density(metric);
  Samples integrand(dv.size());
  for (std::size_t i = 0; i < dv.size(); ++i) integrand[i] = 2.0 * lap_f[i] * std::exp(-weight.f()[i]) * dv[i];
  const RadialIntegral vol = integrate_radial(metric.grid(), integrand);
  out.volume_form = vol.value + (metric.grid().origin_capped() ? 0.0 : profile.front());
  out.volume_tail_error = vol.tail_error;
  out.discrepancy = std::abs(out.volume_form - out.flux.value);
  out.error = out.adm.fit.error + out.flux.fit.error;

  const double tol = 1e-3 * std::max(std::abs(out.flux.value), std::abs(out.adm.value)) +
                     10.0 * (out.flux.fit.error + vol.tail_error) + 1e-8;
  if (out.discrepancy > tol) {
    throw NumericalError(kModule, "weight flux " + std::to_string(out.flux.value) +
                                      " disagrees with its divergence-theorem form " +
                                      std::to_string(out.volume_form));
  }
  return out;
}

radial::WeightField solve_weight(const radial::RadialMetric& metric) {
  const RadialGrid& grid = metric.grid();
  const std::size_t n = grid.size();
  const int dim = metric.dim();
  const auto wp = metric.as_warped();
  const Samples R = radial::curvature(metric).R;

  double r_scale = 0.0;
  for (double x : R) r_scale = std::max(r_scale, std::abs(x));
  for (std::size_t i = 0; i < n; ++i) {
    const double tol = 1e-6 * (1.0 / (wp.psi[i] * wp.psi[i]) + r_scale);
    if (R[i] < -tol) {
      throw PreconditionError(kModule, "scalar curvature is negative (R = " + std::to_string(R[i]) + " at r = " +
                                           std::to_string(grid.r(i)) + "); -4 Laplacian + R need not be positive");
    }
  }

  // Finite-volume form in s: rows are (-4 Laplacian(w) + R w) times the cell volume.
  const double ds = grid.step();
  Samples a(n), vol(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = std::pow(wp.psi[i], dim - 1);
    a[i] = p / (wp.phi[i] * grid.dr_ds(i));
    vol[i] = wp.phi[i] * p * grid.dr_ds(i) * ds;
  }
  if (!grid.origin_capped()) vol.front() *= 0.5;
  vol.back() *= 0.5;
  const double robin = a.back() * grid.dr_ds(n - 1) * (dim - 2.0) / grid.r_max();

  std::vector<Eigen::Triplet<double>> entries;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    double diag = R[i] * vol[i];
    if (i > 0) {
      const double c = 4.0 * 0.5 * (a[i - 1] + a[i]) / ds;
      diag += c;
      entries.emplace_back(ii, ii - 1, -c);
    }
    if (i + 1 < n) {
      const double c = 4.0 * 0.5 * (a[i] + a[i + 1]) / ds;
      diag += c;
      entries.emplace_back(ii, ii + 1, -c);
    }
    entries.emplace_back(ii, ii, diag);
  }
  entries.emplace_back(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(n - 1), 4.0 * robin);
  rhs[static_cast<Eigen::Index>(n - 1)] = 4.0 * robin;

  Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  A.setFromTriplets(entries.begin(), entries.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw NumericalError(kModule, "weight equation matrix is singular");
  Eigen::VectorXd w = solver.solve(rhs);

  // Defect correction towards the fourth-order operator used by `laplacian`;
  // boundary rows keep the second-order conditions.
  const std::size_t first = grid.origin_capped() ? 0 : 1;
  for (int iter = 0; iter < 40; ++iter) {
    Samples ws(w.data(), w.data() + n);
    const Samples lap = radial::laplacian(metric, ws);
    Eigen::VectorXd defect = rhs - A * w;
    for (std::size_t i = first; i + 1 < n; ++i) {
      defect[static_cast<Eigen::Index>(i)] = -(-4.0 * lap[i] + R[i] * ws[i]) * vol[i];
    }
    const Eigen::VectorXd dw = solver.solve(defect);
    w += dw;
    if (dw.lpNorm<Eigen::Infinity>() <= 1e-15 * w.lpNorm<Eigen::Infinity>()) break;
  }

  Samples ws(w.data(), w.data() + n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(ws[i] > 0.0) || !std::isfinite(ws[i])) {
      throw NumericalError(kModule, "weight solution lost positivity at r = " + std::to_string(grid.r(i)));
    }
  }
  return radial::WeightField::from_w(grid, std::move(ws));
}

LambdaAle lambda_ale(const radial::RadialMetric& metric, const radial::WeightField& weight) {
  if (!(metric.grid() == weight.grid())) throw PreconditionError(kModule, "metric and weight live on different grids");
  std::optional<radial::RadialMetric> slot;
  LambdaAle out;
  out.adm = adm_mass(isothermal(metric, slot));

  const Samples grad = radial::gradient_norm_sq(metric, weight.w());
  const Samples R = radial::curvature(metric).R;
  const Samples dv = radial::volume_density(metric);
  Samples integrand(dv.size());
  for (std::size_t i = 0; i < dv.size(); ++i) {
    const double w = weight.w()[i];
    integrand[i] = (4.0 * grad[i] + R[i] * w * w) * dv[i];
  }
  RadialIntegral energy;
  try {
    energy = integrate_radial(metric.grid(), integrand);
  } catch (const NumericalError& e) {
    throw NumericalError(kModule, std::string("energy integral: ") + e.what());
  }
  out.energy = energy.value;
  out.tail_error = energy.tail_error;
  out.value = out.energy - out.adm.value;
  return out;
}

MassReport mass_report(const radial::RadialMetric& metric, const radial::WeightField& weight) {
  const WeightedMass wm = weighted_mass(metric, weight);
  const LambdaAle la = lambda_ale(metric, weight);
  MassReport out;
  out.adm_mass = wm.adm.value;
  out.weighted_mass = wm.value;
  out.lambda_ale = la.value;
  out.boundary_samples = wm.adm.ladder;
  out.extrapolation_error = wm.error + la.tail_error;
  out.identity_residual = std::abs(out.weighted_mass + out.lambda_ale);
  out.flux_cross_check = wm.discrepancy;
  return out;
}

}  // namespace wsl::mass
