#include "wsl/witten.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "wsl/clifford.hpp"
#include "wsl/error.hpp"
#include "wsl/quadrature.hpp"

namespace wsl::witten {

namespace {

constexpr const char* kModule = "witten";
using C = std::complex<double>;

void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError(kModule, what);
}

struct Conformal {
  Samples h, h_r;
};

Conformal conformal_exponent(const radial::RadialMetric& metric) {
  require(metric.is_conformally_flat(), "Witten spinors are built in the conformally flat chart");
  const auto& u = metric.conformal().u;
  Conformal c;
  c.h.resize(u.size());
  const double p = 2.0 / (metric.dim() - 2.0);
  for (std::size_t i = 0; i < u.size(); ++i) c.h[i] = p * std::log(u[i]);
  c.h_r = d_dr(metric.grid(), c.h, Parity::even);
  return c;
}

// Clifford data at the point r * nu with nu = (1, ..., 1)/sqrt(n).
struct Direction {
  std::vector<Eigen::MatrixXcd> gamma;
  Eigen::VectorXd nu;
  Eigen::MatrixXcd gamma_r;
};

Direction generic_direction(int n) {
  Direction d;
  d.gamma = clifford::gamma_matrices(n);
  d.nu = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  d.gamma_r = Eigen::MatrixXcd::Zero(d.gamma[0].rows(), d.gamma[0].cols());
  for (int k = 0; k < n; ++k) d.gamma_r += d.nu[k] * d.gamma[static_cast<std::size_t>(k)];
  return d;
}

// sup_i |(D - (1/2) f_r e^{-h} gamma_r) (b psi0)| over the size of the terms and of |b|/r.
double dirac_residual(const radial::RadialMetric& metric, const Conformal& c, const Samples& b, const Samples* f,
                      const Eigen::VectorXcd& psi0) {
  const int n = metric.dim();
  const Direction dir = generic_direction(n);
  const Samples b_r = d_dr(metric.grid(), b, Parity::even);
  const Samples f_r = f ? d_dr(metric.grid(), *f, Parity::even) : Samples(b.size(), 0.0);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    Eigen::VectorXcd dpsi = Eigen::VectorXcd::Zero(psi0.size());
    for (int k = 0; k < n; ++k) {
      const auto& g = dir.gamma[static_cast<std::size_t>(k)];
      dpsi += g * (b_r[i] * dir.nu[k] * psi0);
      dpsi += 0.5 * (n - 1.0) * c.h_r[i] * dir.nu[k] * (g * (b[i] * psi0));
      dpsi -= 0.5 * f_r[i] * dir.nu[k] * (g * (b[i] * psi0));
    }
    const double e = std::exp(-c.h[i]);
    worst = std::max(worst, e * dpsi.norm());
    // |b|/r keeps the scale away from zero where every term vanishes (flat space)
    const double r = std::max(metric.grid().r(i), metric.grid().r(1));
    scale = std::max(scale, e * (std::abs(b_r[i]) + 0.5 * (n - 1.0) * std::abs(c.h_r[i] * b[i]) +
                                 0.5 * std::abs(f_r[i] * b[i]) + std::abs(b[i]) / r));
  }
  return scale > 0.0 ? worst / scale : worst;
}

void require_unit(const radial::RadialMetric& metric, const Eigen::VectorXcd& psi0) {
  require(psi0.size() == clifford::spinor_rank(metric.dim()), "psi0 has the wrong spinor rank");
  require(std::abs(psi0.norm() - 1.0) <= 1e-12, "psi0 must be a unit spinor");
}

WittenSpinor finish(const radial::RadialMetric& metric, WittenSpinor s, double tolerance) {
  if (!(s.dirac_residual <= tolerance)) {
    throw NumericalError(kModule, "Dirac residual " + std::to_string(s.dirac_residual) + " exceeds tolerance " +
                                      std::to_string(tolerance));
  }
  s.decay_order = estimate_decay_order(metric.grid(), s.amplitude, 1.0).order;
  return s;
}

Energy integrate_energy(const radial::RadialMetric& metric, const Samples& density) {
  const Samples dv = radial::volume_density(metric);
  Samples integrand(dv.size());
  for (std::size_t i = 0; i < dv.size(); ++i) integrand[i] = density[i] * dv[i];
  try {
    const RadialIntegral I = integrate_radial(metric.grid(), integrand);
    return {I.value, I.tail_error};
  } catch (const NumericalError& e) {
    throw NumericalError(kModule, std::string("energy integral: ") + e.what());
  }
}

}  // namespace

Eigen::VectorXcd unit_spinor(int n, int index) {
  const int rank = clifford::spinor_rank(n);
  require(index >= 0 && index < rank, "spinor basis index out of range");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(rank);
  v[index] = 1.0;
  return v;
}

WittenSpinor witten_spinor(const radial::RadialMetric& metric, const Eigen::VectorXcd& psi0, double tolerance) {
  require_unit(metric, psi0);
  const Conformal c = conformal_exponent(metric);
  WittenSpinor s;
  s.psi0 = psi0;
  s.amplitude.resize(c.h.size());
  for (std::size_t i = 0; i < c.h.size(); ++i) s.amplitude[i] = std::exp(-0.5 * (metric.dim() - 1.0) * c.h[i]);
  s.dirac_residual = dirac_residual(metric, c, s.amplitude, nullptr, psi0);
  return finish(metric, std::move(s), tolerance);
}

WittenSpinor weighted_witten_spinor(const radial::RadialMetric& metric, const radial::WeightField& weight,
                                    const Eigen::VectorXcd& psi0, double tolerance) {
  require(metric.grid() == weight.grid(), "metric and weight live on different grids");
  WittenSpinor s = witten_spinor(metric, psi0, tolerance);
  for (std::size_t i = 0; i < s.amplitude.size(); ++i) s.amplitude[i] *= std::exp(0.5 * weight.f()[i]);
  s.weighted = true;
  s.dirac_residual = dirac_residual(metric, conformal_exponent(metric), s.amplitude, &weight.f(), psi0);
  return finish(metric, std::move(s), tolerance);
}

Samples gradient_norm_sq(const radial::RadialMetric& metric, const WittenSpinor& spinor) {
  require_unit(metric, spinor.psi0);
  const Conformal c = conformal_exponent(metric);
  const int n = metric.dim();
  const Direction dir = generic_direction(n);
  const Samples& b = spinor.amplitude;
  const Samples b_r = d_dr(metric.grid(), b, Parity::even);
  Samples out(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      const auto& g = dir.gamma[static_cast<std::size_t>(k)];
      // H e_k + d_k h with H = h_r gamma_r and d_k h = h_r nu_k
      const Eigen::VectorXcd term =
          b_r[i] * dir.nu[k] * spinor.psi0 +
          0.5 * b[i] * c.h_r[i] * (dir.gamma_r * (g * spinor.psi0) + dir.nu[k] * spinor.psi0);
      acc += term.squaredNorm();
    }
    out[i] = std::exp(-2.0 * c.h[i]) * acc;
  }
  return out;
}

Samples kato_gap(const radial::RadialMetric& metric, const WittenSpinor& spinor) {
  const Samples grad = gradient_norm_sq(metric, spinor);
  const Conformal c = conformal_exponent(metric);
  Samples abs_b(spinor.amplitude.size());
  for (std::size_t i = 0; i < abs_b.size(); ++i) abs_b[i] = std::abs(spinor.amplitude[i]);
  const Samples abs_r = d_dr(metric.grid(), abs_b, Parity::even);
  Samples out(grad.size());
  for (std::size_t i = 0; i < grad.size(); ++i) out[i] = std::sqrt(grad[i]) - std::exp(-c.h[i]) * std::abs(abs_r[i]);
  return out;
}

Energy witten_energy(const radial::RadialMetric& metric, const radial::WeightField& weight,
                     const WittenSpinor& spinor) {
  require(metric.grid() == weight.grid(), "metric and weight live on different grids");
  const Samples grad = gradient_norm_sq(metric, spinor);
  const Samples Rf = radial::weighted_scalar_curvature(metric, weight);
  Samples density(grad.size());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double b = spinor.amplitude[i];
    density[i] = 4.0 * (grad[i] + 0.25 * Rf[i] * b * b) * std::exp(-weight.f()[i]);
  }
  return integrate_energy(metric, density);
}

Energy dirichlet_energy(const radial::RadialMetric& metric, const radial::WeightField& weight,
                        const WittenSpinor& spinor) {
  require(metric.grid() == weight.grid(), "metric and weight live on different grids");
  const Samples grad = gradient_norm_sq(metric, spinor);
  Samples density(grad.size());
  for (std::size_t i = 0; i < grad.size(); ++i) density[i] = grad[i] * std::exp(-weight.f()[i]);
  return integrate_energy(metric, density);
}

}  // namespace wsl::witten
