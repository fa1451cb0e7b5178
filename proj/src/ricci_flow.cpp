#include "wsl/ricci_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wsl/error.hpp"
#include "wsl/quadrature.hpp"
#include "wsl/weight_mass.hpp"
#include "wsl/witten.hpp"

namespace wsl::flow {

namespace {

constexpr const char* kModule = "ricci_flow";

radial::RadialMetric with_samples(const radial::RadialMetric& like, Samples phi, Samples psi) {
  return radial::RadialMetric::warped(like.grid(), like.dim(), std::move(phi), std::move(psi), like.decay_order());
}

radial::WeightField canonical_weight(const radial::RadialMetric& metric) {
  try {
    return mass::solve_weight(metric);
  } catch (const PreconditionError& e) {
    throw NumericalError(kModule, std::string("weight solve failed along the flow: ") + e.what());
  }
}

double sup_abs(const Samples& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace

double min_arclength_spacing(const radial::RadialMetric& metric) {
  const auto wp = metric.as_warped();
  const RadialGrid& grid = metric.grid();
  double h = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    h = std::min(h, 0.5 * (wp.phi[i] + wp.phi[i + 1]) * (grid.r(i + 1) - grid.r(i)));
  }
  return h;
}

FlowState initial_state(const radial::RadialMetric& metric) {
  radial::RadialMetric warped = radial::to_warped(metric);
  radial::WeightField weight = canonical_weight(warped);
  return FlowState{0.0, std::move(warped), std::move(weight), std::nullopt};
}

radial::WarpedProduct flow_velocity(const radial::RadialMetric& metric) {
  const auto& wp = metric.warped();
  const radial::CurvatureProfile c = radial::curvature(metric);
  radial::WarpedProduct v{Samples(wp.phi.size()), Samples(wp.psi.size())};
  for (std::size_t i = 0; i < v.phi.size(); ++i) {
    v.phi[i] = -c.ric_rad[i] * wp.phi[i];
    v.psi[i] = -c.ric_sph[i] * wp.psi[i];
  }
  v.phi.back() = 0.0;
  v.psi.back() = 0.0;
  if (!metric.grid().origin_capped()) {
    v.phi.front() = 0.0;
    v.psi.front() = 0.0;
  }
  return v;
}

FlowState flow_step(const FlowState& state, double dt, const FlowOptions& options) {
  const double h = min_arclength_spacing(state.metric);
  const double limit = options.cfl * h * h;
  if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12)) {
    throw PreconditionError(kModule, "time step " + std::to_string(dt) + " violates dt <= " +
                                         std::to_string(options.cfl) + " h^2 = " + std::to_string(limit));
  }
  const auto& y = state.metric.warped();
  const std::size_t n = y.phi.size();

  auto stage = [&](const radial::WarpedProduct& base, const radial::WarpedProduct& k, double scale) {
    Samples phi(n), psi(n);
    for (std::size_t i = 0; i < n; ++i) {
      phi[i] = base.phi[i] + scale * k.phi[i];
      psi[i] = base.psi[i] + scale * k.psi[i];
    }
    try {
      return with_samples(state.metric, std::move(phi), std::move(psi));
    } catch (const PreconditionError& e) {
      throw NumericalError(kModule, std::string("flow left the space of metrics: ") + e.what());
    }
  };

  const radial::WarpedProduct k1 = flow_velocity(state.metric);
  const radial::WarpedProduct k2 = flow_velocity(stage(y, k1, 0.5 * dt));
  const radial::WarpedProduct k3 = flow_velocity(stage(y, k2, 0.5 * dt));
  const radial::WarpedProduct k4 = flow_velocity(stage(y, k3, dt));
  radial::WarpedProduct sum{Samples(n), Samples(n)};
  for (std::size_t i = 0; i < n; ++i) {
    sum.phi[i] = (k1.phi[i] + 2.0 * k2.phi[i] + 2.0 * k3.phi[i] + k4.phi[i]) / 6.0;
    sum.psi[i] = (k1.psi[i] + 2.0 * k2.psi[i] + 2.0 * k3.psi[i] + k4.psi[i]) / 6.0;
  }
  radial::RadialMetric next = stage(y, sum, dt);

  const radial::CurvatureProfile c = radial::curvature(next);
  const double ric = std::max(sup_abs(c.ric_rad), sup_abs(c.ric_sph));
  if (!std::isfinite(ric) || ric > options.ricci_limit) {
    throw NumericalError(kModule, "curvature blow-up: sup |Ric| = " + std::to_string(ric) +
                                      " at t = " + std::to_string(state.t + dt));
  }
  if (!options.resolve_weight) return FlowState{state.t + dt, std::move(next), state.weight, std::nullopt};
  radial::WeightField weight = canonical_weight(next);
  return FlowState{state.t + dt, std::move(next), std::move(weight), std::nullopt};
}

double soliton_residual(const FlowState& state) {
  const radial::CurvatureProfile c = radial::curvature(state.metric, state.weight);
  double r_scale = 0.0;
  for (double x : c.R) r_scale = std::max(r_scale, std::abs(x));
  if (sup_abs(c.R_f) > 1e-6 * std::max(r_scale, 1.0)) {
    throw PreconditionError(kModule, "weight is stale: sup |R_f| = " + std::to_string(sup_abs(c.R_f)));
  }
  const Samples dv = radial::volume_density(state.metric);
  const double n = state.metric.dim();
  Samples integrand(dv.size());
  for (std::size_t i = 0; i < dv.size(); ++i) {
    const double a = c.ric_f_rad[i], b = c.ric_f_sph[i];
    integrand[i] = (a * a + (n - 1.0) * b * b) * std::exp(-state.weight.f()[i]) * dv[i];
  }
  return integrate_radial(state.metric.grid(), integrand).value;
}

Diagnostics diagnose(const FlowState& state) {
  Diagnostics d;
  const mass::WeightedMass wm = mass::weighted_mass(state.metric, state.weight);
  const mass::LambdaAle la = mass::lambda_ale(state.metric, state.weight);
  d.m = wm.adm.value;
  d.m_f = wm.value;
  d.lambda_ale = la.value;
  d.extrapolation_error = wm.error;
  d.soliton_residual = soliton_residual(state);
  const Samples R = radial::curvature(state.metric).R;
  d.min_R = *std::min_element(R.begin(), R.end());

  const radial::RadialMetric iso = radial::to_isothermal(state.metric);
  const radial::WeightField iso_weight = canonical_weight(iso);
  const witten::WittenSpinor spinor =
      witten::weighted_witten_spinor(iso, iso_weight, witten::unit_spinor(iso.dim()), 1e-3);
  d.dirichlet_energy = witten::dirichlet_energy(iso, iso_weight, spinor).value;
  return d;
}

std::vector<FlowState> run(const FlowState& initial, double dt, double t_end, double cadence,
                           const FlowOptions& options) {
  const double per = cadence / dt;
  const auto steps_per_sample = static_cast<long>(std::llround(per));
  if (steps_per_sample < 1 || std::abs(per - static_cast<double>(steps_per_sample)) > 1e-9 * per) {
    throw PreconditionError(kModule, "diagnostic cadence must be a whole number of time steps");
  }
  const auto samples = static_cast<long>(std::llround(t_end / cadence));
  std::vector<FlowState> out;
  FlowState state = initial;
  state.diagnostics = diagnose(state);
  out.push_back(state);
  for (long s = 0; s < samples; ++s) {
    for (long k = 0; k < steps_per_sample; ++k) state = flow_step(state, dt, options);
    state.t = initial.t + static_cast<double>(s + 1) * cadence;
    state.diagnostics = diagnose(state);
    out.push_back(state);
  }
  return out;
}

MonotonicityReport monotonicity_check(const std::vector<FlowState>& trajectory) {
  if (trajectory.size() < 3) throw PreconditionError(kModule, "need at least three states");
  for (const auto& s : trajectory) {
    if (!s.diagnostics) throw PreconditionError(kModule, "every state needs diagnostics");
  }
  const double dt = trajectory[1].t - trajectory[0].t;
  for (std::size_t k = 1; k < trajectory.size(); ++k) {
    if (std::abs(trajectory[k].t - trajectory[k - 1].t - dt) > 1e-9 * std::abs(dt)) {
      throw PreconditionError(kModule, "trajectory is not uniformly spaced in time");
    }
  }
  MonotonicityReport rep;
  const double m0 = trajectory.front().diagnostics->m;
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const Diagnostics& d = *trajectory[k].diagnostics;
    rep.mass_drift = std::max(rep.mass_drift, std::abs(d.m - m0));
    rep.mass_tolerance = std::max(rep.mass_tolerance, d.extrapolation_error);
    if (k > 0) {
      const double inc = d.m_f - trajectory[k - 1].diagnostics->m_f;
      rep.max_increase = std::max(rep.max_increase, inc);
      if (inc > 1e-12 * std::abs(d.m_f)) rep.non_increasing = false;
    }
  }
  for (std::size_t k = 1; k + 1 < trajectory.size(); ++k) {
    const Diagnostics& prev = *trajectory[k - 1].diagnostics;
    const Diagnostics& here = *trajectory[k].diagnostics;
    const Diagnostics& next = *trajectory[k + 1].diagnostics;
    Midpoint mp;
    mp.t = trajectory[k].t;
    mp.dmf_dt = (next.m_f - prev.m_f) / (2.0 * dt);
    mp.minus_two_s = -2.0 * here.soliton_residual;
    mp.relative_error = std::abs(mp.dmf_dt - mp.minus_two_s) / std::max(std::abs(mp.minus_two_s), 1e-300);
    mp.ddirichlet_dt = (next.dirichlet_energy - prev.dirichlet_energy) / (2.0 * dt);
    mp.minus_half_s = -0.5 * here.soliton_residual;
    mp.relative_error_dirichlet =
        std::abs(mp.ddirichlet_dt - mp.minus_half_s) / std::max(std::abs(mp.minus_half_s), 1e-300);
    if (here.soliton_residual == 0.0 && mp.dmf_dt == 0.0) mp.relative_error = 0.0;
    if (here.soliton_residual == 0.0 && mp.ddirichlet_dt == 0.0) mp.relative_error_dirichlet = 0.0;
    rep.max_relative_error = std::max(rep.max_relative_error, mp.relative_error);
    rep.max_relative_error_dirichlet = std::max(rep.max_relative_error_dirichlet, mp.relative_error_dirichlet);
    rep.midpoints.push_back(mp);
  }
  return rep;
}

}  // namespace wsl::flow
