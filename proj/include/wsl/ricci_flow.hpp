#pragma once

#include <optional>
#include <vector>

#include "wsl/radial_geometry.hpp"

/// Rotationally symmetric Ricci flow d/dt g = -2 Ric in the fixed radial
/// gauge: d/dt phi = -Ric_rad phi, d/dt psi = -Ric_sph psi. The outer node is
/// pinned, and so is the inner node unless the grid is capped at the origin.
namespace wsl::flow {

struct Diagnostics {
  double m = 0.0;
  double m_f = 0.0;
  double lambda_ale = 0.0;
  double dirichlet_energy = 0.0;
  double soliton_residual = 0.0;
  double min_R = 0.0;
  double extrapolation_error = 0.0;  ///< of m and of the weight flux
};

struct FlowState {
  double t = 0.0;
  radial::RadialMetric metric;  ///< warped chart
  radial::WeightField weight;   ///< canonical weight of `metric`
  std::optional<Diagnostics> diagnostics;
};

struct FlowOptions {
  double cfl = 0.1;           ///< dt <= cfl * h^2, h the smallest arclength between nodes
  double ricci_limit = 1e4;   ///< sup |Ric| above this aborts
  bool resolve_weight = true;  ///< off only for pure time-integration studies
};

double min_arclength_spacing(const radial::RadialMetric& metric);

/// Warped form of `metric` together with its canonical weight.
FlowState initial_state(const radial::RadialMetric& metric);

/// One classical RK4 step followed by a fresh weight solve. Without the
/// solve the returned weight is the previous one and is stale.
FlowState flow_step(const FlowState& state, double dt, const FlowOptions& options = {});

/// Time derivative (d/dt phi, d/dt psi) of the flow, zero at the pinned node.
radial::WarpedProduct flow_velocity(const radial::RadialMetric& metric);

/// int (|Ric + Hess f|^2) e^{-f} dV; rejects a weight whose R_f is not small.
double soliton_residual(const FlowState& state);

/// m, m_f, lambda_ALE, soliton residual and the Dirichlet energy of the
/// weighted Witten spinor in the isothermal chart (weight re-solved there).
Diagnostics diagnose(const FlowState& state);

/// Integrates to `t_end`, storing a diagnosed state every `cadence`
/// (which must be a whole number of steps).
std::vector<FlowState> run(const FlowState& initial, double dt, double t_end, double cadence,
                           const FlowOptions& options = {});

struct Midpoint {
  double t = 0.0;
  double dmf_dt = 0.0;
  double minus_two_s = 0.0;
  double relative_error = 0.0;
  double ddirichlet_dt = 0.0;
  double minus_half_s = 0.0;
  double relative_error_dirichlet = 0.0;
};

struct MonotonicityReport {
  std::vector<Midpoint> midpoints;
  bool non_increasing = true;     ///< m_f(t_{k+1}) <= m_f(t_k) + tolerance at every sample
  double max_increase = 0.0;
  double max_relative_error = 0.0;
  double max_relative_error_dirichlet = 0.0;
  double mass_drift = 0.0;        ///< max |m(t) - m(0)|
  double mass_tolerance = 0.0;    ///< max extrapolation error along the trajectory
};

/// Central differences of m_f and the Dirichlet energy at the interior
/// states, against -2 S and -S/2. States must carry diagnostics and be
/// uniformly spaced in time.
MonotonicityReport monotonicity_check(const std::vector<FlowState>& trajectory);

}  // namespace wsl::flow
