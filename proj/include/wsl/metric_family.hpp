#pragma once

#include <optional>

#include "wsl/radial_geometry.hpp"

namespace wsl::family {

struct GridSpec {
  Spacing spacing = Spacing::log_uniform;
  bool origin_capped = false;
  double r_min = 1e-3;
  double r_max = 1e5;
  std::size_t n_points = 4096;
};

RadialGrid make_grid(const GridSpec& spec);

enum class BumpProfile {
  gaussian,   ///< u += eps exp(-((r - c)/w)^2); R may change sign
  potential,  ///< u += eps Phi with -Laplacian(Phi) = shell density; R >= 0 for eps >= 0
};

struct Bump {
  double eps = 0.0;
  double center = 2.0;
  double width = 0.5;
  BumpProfile profile = BumpProfile::gaussian;
};

enum class Chart { conformal, warped };

/// u = 1 + A r^{2-n} + bump, optionally re-expressed in a warped chart whose
/// radius r relates to the isothermal radius by rho = r (1 + shift exp(-r^2)).
struct MetricSpec {
  enum class Family { flat, schwarzschild_conformal } family = Family::flat;
  int dim = 3;
  double A = 0.0;
  std::optional<double> tau;  ///< defaults to n - 2 - 0.05
  std::optional<Bump> bump;
  Chart chart = Chart::conformal;
  double shift = 0.0;
  GridSpec grid;
};

/// Closed-form conformal factor of a spec and its first two rho-derivatives.
class ConformalFactor {
 public:
  explicit ConformalFactor(const MetricSpec& spec);

  /// derivative in {0, 1, 2}
  double operator()(double rho, int derivative = 0) const;

 private:
  double shell_density(double s) const;
  double shell_mass(double rho) const;
  double outer_moment(double rho) const;

  int dim_;
  double A_;
  std::optional<Bump> bump_;
};

double default_tau(int dim);

radial::RadialMetric build_metric(const MetricSpec& spec);

}  // namespace wsl::family
