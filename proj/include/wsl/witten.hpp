#pragma once

#include <Eigen/Dense>

#include "wsl/radial_geometry.hpp"

/// Witten spinors on conformally flat AE metrics g = e^{2h} (flat), built by
/// conformal covariance: psi = e^{-(n-1)h/2} psi0 in the frame e^{-h} d_i.
namespace wsl::witten {

struct WittenSpinor {
  Eigen::VectorXcd psi0;  ///< unit spinor of rank 2^{floor(n/2)}
  Samples amplitude;      ///< psi = amplitude(r) psi0
  bool weighted = false;  ///< amplitude includes e^{f/2}
  double dirac_residual = 0.0;  ///< sup |D psi| (or |D_f psi|) relative to its terms and |psi|/r
  double decay_order = 0.0;     ///< of |psi - psi0|
};

/// Throws NumericalError when the discrete Dirac residual exceeds `tolerance`.
WittenSpinor witten_spinor(const radial::RadialMetric& metric, const Eigen::VectorXcd& psi0,
                           double tolerance = 1e-4);

/// e^{f/2} times the Witten spinor, checked against D_f = D - (1/2) grad f.
WittenSpinor weighted_witten_spinor(const radial::RadialMetric& metric, const radial::WeightField& weight,
                                    const Eigen::VectorXcd& psi0, double tolerance = 1e-4);

/// |grad psi|^2 at the nodes, from the conformal spin connection
/// grad_k psi = d_k psi + (1/2)(H e_k + d_k h) psi, H = sum_i (d_i h) e_i,
/// evaluated with explicit Clifford matrices along a fixed generic direction.
Samples gradient_norm_sq(const radial::RadialMetric& metric, const WittenSpinor& spinor);

/// |grad psi| - |grad |psi|| at the nodes (non-negative by Kato's inequality).
Samples kato_gap(const radial::RadialMetric& metric, const WittenSpinor& spinor);

struct Energy {
  double value = 0.0;
  double tail_error = 0.0;
};

/// 4 int (|grad psi|^2 + R_f |psi|^2 / 4) e^{-f} dV
Energy witten_energy(const radial::RadialMetric& metric, const radial::WeightField& weight,
                     const WittenSpinor& spinor);

/// int |grad psi|^2 e^{-f} dV
Energy dirichlet_energy(const radial::RadialMetric& metric, const radial::WeightField& weight,
                        const WittenSpinor& spinor);

/// First basis vector of the spinor module in dimension n.
Eigen::VectorXcd unit_spinor(int n, int index = 0);

}  // namespace wsl::witten
