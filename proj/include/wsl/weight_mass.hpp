#pragma once

#include <vector>

#include "wsl/extrapolation.hpp"
#include "wsl/radial_geometry.hpp"

namespace wsl::mass {

struct BoundarySample {
  double radius;
  double value;
};

/// A boundary flux evaluated on the outer dyadic ladder and extrapolated.
struct FluxLimit {
  double value = 0.0;
  std::vector<BoundarySample> ladder;
  LimitFit fit;
};

/// Radii of the ladder {r_max/16, r_max/8, r_max/4, r_max/2}, snapped to nodes.
std::vector<std::size_t> ladder_nodes(const RadialGrid& grid);

/// Unnormalised ADM mass lim int_{S_R} (d_i g_ij - d_j g_ii) dA_j with the
/// Euclidean area element. Requires the conformally flat chart.
FluxLimit adm_mass(const radial::RadialMetric& metric);

/// 2 <grad f, nu> e^{-f} |S_R|_g as a function of the node radius.
Samples weight_flux_profile(const radial::RadialMetric& metric, const radial::WeightField& weight);

struct WeightedMass {
  double value = 0.0;  ///< m + flux
  FluxLimit adm;
  FluxLimit flux;
  /// 2 int (Laplacian_f f) e^{-f} dV plus the flux through the inner edge;
  /// equals flux.value by the divergence theorem.
  double volume_form = 0.0;
  double volume_tail_error = 0.0;
  double discrepancy = 0.0;
  double error = 0.0;  ///< combined extrapolation error of both limits
};

/// The ADM part is computed on to_isothermal(metric); the flux in the given chart.
WeightedMass weighted_mass(const radial::RadialMetric& metric, const radial::WeightField& weight);

/// w with -4 Laplacian(w) + R w = 0, zero flux at the inner edge and the
/// exterior harmonic condition dw/dr = -(n-2)(w-1)/r at the outer edge.
radial::WeightField solve_weight(const radial::RadialMetric& metric);

struct LambdaAle {
  double value = 0.0;   ///< energy - m
  double energy = 0.0;  ///< int (4|grad w|^2 + R w^2) dV
  double tail_error = 0.0;
  FluxLimit adm;
};

LambdaAle lambda_ale(const radial::RadialMetric& metric, const radial::WeightField& weight);

struct MassReport {
  double adm_mass = 0.0;
  double weighted_mass = 0.0;
  double lambda_ale = 0.0;
  std::vector<BoundarySample> boundary_samples;
  double extrapolation_error = 0.0;
  double identity_residual = 0.0;  ///< |weighted_mass + lambda_ale|
  double flux_cross_check = 0.0;   ///< |flux limit - volume form|
};

MassReport mass_report(const radial::RadialMetric& metric, const radial::WeightField& weight);

}  // namespace wsl::mass
