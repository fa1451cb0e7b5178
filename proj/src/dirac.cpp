#include "wsl/dirac.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <unsupported/Eigen/FFT>

#include "wsl/clifford.hpp"
#include "wsl/error.hpp"

namespace wsl::dirac {

namespace {

constexpr const char* kModule = "dirac_spectral";
using C = std::complex<double>;
using CVec = Eigen::VectorXcd;

void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError(kModule, what);
}

// Derivatives along the axes of a flat periodic grid. Spinor fields pick up
// the sign -1 across an antiperiodic seam; scalar fields are periodic.
class FlatCalculus {
 public:
  FlatCalculus(const ModelSpace& space, Scheme scheme) : scheme_(scheme) {
    require(space.is_flat(), "operation needs a flat model space");
    require(space.resolution >= 8, "resolution must be at least 8");
    if (const auto* c = std::get_if<Circle>(&space.kind)) {
      dim_ = 1;
      n_ = {space.resolution, 1};
      length_ = {c->length, 1.0};
      phase_ = {c->spin == SpinStructure::trivial ? 0.5 : 0.0, 0.0};
    } else {
      const auto& t = std::get<FlatTorus>(space.kind);
      dim_ = 2;
      n_ = {space.resolution, space.resolution};
      length_ = t.lengths;
      for (int a = 0; a < 2; ++a) phase_[a] = t.spin[a] == SpinStructure::trivial ? 0.5 : 0.0;
    }
    for (int a = 0; a < dim_; ++a) require(length_[a] > 0.0, "side lengths must be positive");
  }

  int dim() const { return dim_; }
  std::size_t points() const { return n_[0] * n_[1]; }
  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= length_[a] / static_cast<double>(n_[a]);
    return v;
  }

  // order 1 or 2 derivative of a scalar field (spinor = false) or of one
  // spinor component (spinor = true) along `axis`.
  CVec derivative(const CVec& u, int axis, int order, bool spinor) const {
    const std::size_t m = n_[axis];
    const std::size_t stride = axis == 0 ? 1 : n_[0];
    const std::size_t lines = points() / m;
    const double phase = spinor ? phase_[axis] : 0.0;
    CVec out(u.size());
    std::vector<C> line(m), res(m);
    for (std::size_t l = 0; l < lines; ++l) {
      const std::size_t base = axis == 0 ? l * n_[0] : l;
      for (std::size_t j = 0; j < m; ++j) line[j] = u[static_cast<Eigen::Index>(base + j * stride)];
      if (scheme_ == Scheme::spectral) {
        spectral_line(line, res, axis, order, phase, spinor);
      } else {
        stencil_line(line, res, axis, order, phase);
      }
      for (std::size_t j = 0; j < m; ++j) out[static_cast<Eigen::Index>(base + j * stride)] = res[j];
    }
    return out;
  }

  CVec scalar_derivative(const Samples& f, int axis, int order) const {
    CVec u(static_cast<Eigen::Index>(f.size()));
    for (std::size_t i = 0; i < f.size(); ++i) u[static_cast<Eigen::Index>(i)] = f[i];
    return derivative(u, axis, order, false);
  }

 private:
  void spectral_line(const std::vector<C>& in, std::vector<C>& out, int axis, int order, double phase,
                     bool spinor) const {
    const std::size_t m = in.size();
    const double L = length_[axis];
    std::vector<C> twisted(m), coef;
    for (std::size_t j = 0; j < m; ++j) {
      const double x = L * static_cast<double>(j) / static_cast<double>(m);
      twisted[j] = in[j] * std::polar(1.0, -2.0 * std::numbers::pi * phase * x / L);
    }
    fft_.fwd(coef, twisted);
    for (std::size_t j = 0; j < m; ++j) {
      const long k = j < m / 2 ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(m);
      const double kappa = 2.0 * std::numbers::pi * (static_cast<double>(k) + phase) / L;
      const bool nyquist = phase == 0.0 && 2 * j == m;
      if (order == 1) {
        coef[j] *= (nyquist && !spinor) ? C(0.0) : C(0.0, kappa);
      } else {
        coef[j] *= -kappa * kappa;
      }
    }
    fft_.inv(out, coef);
    for (std::size_t j = 0; j < m; ++j) {
      const double x = L * static_cast<double>(j) / static_cast<double>(m);
      out[j] *= std::polar(1.0, 2.0 * std::numbers::pi * phase * x / L);
    }
  }

  void stencil_line(const std::vector<C>& in, std::vector<C>& out, int axis, int order, double phase) const {
    const long m = static_cast<long>(in.size());
    const double h = length_[axis] / static_cast<double>(m);
    auto at = [&](long j) {
      const long q = ((j % m) + m) % m;
      const long wraps = (j - q) / m;
      const double sign = (phase != 0.0 && (wraps % 2 != 0)) ? -1.0 : 1.0;
      return sign * in[static_cast<std::size_t>(q)];
    };
    for (long j = 0; j < m; ++j) {
      C v;
      if (scheme_ == Scheme::fd2) {
        v = order == 1 ? (at(j + 1) - at(j - 1)) / (2.0 * h) : (at(j + 1) - 2.0 * at(j) + at(j - 1)) / (h * h);
      } else if (order == 1) {
        v = (-at(j + 2) + 8.0 * at(j + 1) - 8.0 * at(j - 1) + at(j - 2)) / (12.0 * h);
      } else {
        v = (-at(j + 2) + 16.0 * at(j + 1) - 30.0 * at(j) + 16.0 * at(j - 1) - at(j - 2)) / (12.0 * h * h);
      }
      out[static_cast<std::size_t>(j)] = v;
    }
  }

  Scheme scheme_;
  int dim_ = 1;
  std::array<std::size_t, 2> n_{1, 1};
  std::array<double, 2> length_{1.0, 1.0};
  std::array<double, 2> phase_{0.0, 0.0};
  mutable Eigen::FFT<double> fft_;
};

// Spinor field with `rank` components stored as consecutive blocks.
struct SpinorOps {
  SpinorOps(const ModelSpace& space, const Samples& f, Scheme scheme)
      : calc(space, scheme), gammas(clifford::gamma_matrices(calc.dim())), rank(clifford::spinor_rank(calc.dim())) {
    require(f.size() == calc.points(), "weight is not sampled on the space's grid");
    for (int a = 0; a < calc.dim(); ++a) {
      grad.push_back(calc.scalar_derivative(f, a, 1).real());
      for (int b = 0; b < calc.dim(); ++b) {
        hess.push_back(calc.derivative(calc.scalar_derivative(f, a, 1), b, 1, false).real());
      }
    }
  }

  std::size_t points() const { return calc.points(); }

  CVec component(const CVec& psi, int c) const {
    return psi.segment(static_cast<Eigen::Index>(c * points()), static_cast<Eigen::Index>(points()));
  }

  // sum_a gamma_a (coef_a . psi), coef_a pointwise scalars
  CVec clifford(const std::vector<CVec>& fields_per_axis) const {
    const auto P = static_cast<Eigen::Index>(points());
    CVec out = CVec::Zero(rank * P);
    for (int a = 0; a < calc.dim(); ++a) {
      const CVec& v = fields_per_axis[static_cast<std::size_t>(a)];
      for (int r = 0; r < rank; ++r) {
        for (int c = 0; c < rank; ++c) {
          const C g = gammas[static_cast<std::size_t>(a)](r, c);
          if (g != C(0.0)) out.segment(r * P, P) += g * v.segment(c * P, P);
        }
      }
    }
    return out;
  }

  CVec d(const CVec& psi, int axis, int order = 1) const {
    const auto P = static_cast<Eigen::Index>(points());
    CVec out(psi.size());
    for (int c = 0; c < rank; ++c) out.segment(c * P, P) = calc.derivative(component(psi, c), axis, order, true);
    return out;
  }

  CVec times(const Eigen::VectorXd& s, const CVec& psi) const {
    const auto P = static_cast<Eigen::Index>(points());
    CVec out(psi.size());
    for (int c = 0; c < rank; ++c) out.segment(c * P, P) = s.cast<C>().cwiseProduct(psi.segment(c * P, P));
    return out;
  }

  CVec dirac_f(const CVec& psi) const {
    std::vector<CVec> parts;
    for (int a = 0; a < calc.dim(); ++a) parts.push_back(d(psi, a) - 0.5 * times(grad[static_cast<std::size_t>(a)], psi));
    return clifford(parts);
  }

  CVec laplacian_f(const CVec& psi) const {
    CVec out = CVec::Zero(psi.size());
    for (int a = 0; a < calc.dim(); ++a) out += d(psi, a, 2) - times(grad[static_cast<std::size_t>(a)], d(psi, a));
    return out;
  }

  CVec hess_clifford(int axis, const CVec& psi) const {
    std::vector<CVec> parts;
    for (int b = 0; b < calc.dim(); ++b) {
      parts.push_back(times(hess[static_cast<std::size_t>(axis * calc.dim() + b)], psi));
    }
    return clifford(parts);
  }

  FlatCalculus calc;
  std::vector<Eigen::MatrixXcd> gammas;
  int rank;
  std::vector<Eigen::VectorXd> grad;
  std::vector<Eigen::VectorXd> hess;
};

Samples scalar_curvature_flat(const FlatCalculus& calc, const Samples& f) {
  Samples out(f.size(), 0.0);
  for (int a = 0; a < calc.dim(); ++a) {
    const Eigen::VectorXd d1 = calc.scalar_derivative(f, a, 1).real();
    const Eigen::VectorXd d2 = calc.scalar_derivative(f, a, 2).real();
    for (std::size_t i = 0; i < f.size(); ++i) {
      out[i] += 2.0 * d2[static_cast<Eigen::Index>(i)] - d1[static_cast<Eigen::Index>(i)] * d1[static_cast<Eigen::Index>(i)];
    }
  }
  return out;
}

Eigen::VectorXd metric_weights(const DiracOperator& op) {
  const FlatCalculus calc(op.space, op.scheme);
  const auto P = static_cast<Eigen::Index>(calc.points());
  Eigen::VectorXd w(op.rank * P);
  for (int c = 0; c < op.rank; ++c) {
    for (Eigen::Index i = 0; i < P; ++i) w[c * P + i] = std::exp(-op.weight[static_cast<std::size_t>(i)]) * calc.cell_volume();
  }
  return w;
}

void require_matching(const ModelSpace& space, const Samples& f) {
  require(space.is_flat(), "operation needs a flat model space");
  require(f.size() == space.points(), "weight is not sampled on the space's grid");
}

// In even dimension the gammas are off-diagonal in the chiral grading,
// H = [[0, B], [B^H, 0]], and the spectrum follows from the half-size B.
bool is_chiral(const DiracOperator& op, const Eigen::MatrixXcd& H) {
  const Eigen::Index half = H.rows() / 2;
  return op.rank % 2 == 0 && H.topLeftCorner(half, half).isZero(0.0) &&
         H.bottomRightCorner(half, half).isZero(0.0);
}

}  // namespace

int ModelSpace::dim() const {
  if (std::holds_alternative<Circle>(kind)) return 1;
  if (std::holds_alternative<FlatTorus>(kind)) return 2;
  return std::get<RoundSphere>(kind).dim;
}

std::size_t ModelSpace::points() const {
  if (std::holds_alternative<Circle>(kind)) return resolution;
  if (std::holds_alternative<FlatTorus>(kind)) return resolution * resolution;
  throw PreconditionError(kModule, "round spheres are not discretised for spinors");
}

std::vector<std::array<double, 2>> nodes(const ModelSpace& space) {
  require(space.is_flat(), "nodes are defined for flat model spaces only");
  std::vector<std::array<double, 2>> out;
  const auto m = static_cast<double>(space.resolution);
  if (const auto* c = std::get_if<Circle>(&space.kind)) {
    for (std::size_t j = 0; j < space.resolution; ++j) out.push_back({c->length * static_cast<double>(j) / m, 0.0});
    return out;
  }
  const auto& t = std::get<FlatTorus>(space.kind);
  for (std::size_t j1 = 0; j1 < space.resolution; ++j1) {
    for (std::size_t j0 = 0; j0 < space.resolution; ++j0) {
      out.push_back({t.lengths[0] * static_cast<double>(j0) / m, t.lengths[1] * static_cast<double>(j1) / m});
    }
  }
  return out;
}

Samples random_weight(const ModelSpace& space, std::uint64_t seed, int max_mode, double amplitude) {
  require(max_mode >= 1, "max_mode must be at least 1");
  const auto pts = nodes(space);
  std::array<double, 2> L{1.0, 1.0};
  if (const auto* c = std::get_if<Circle>(&space.kind)) L[0] = c->length;
  else L = std::get<FlatTorus>(space.kind).lengths;
  const int kmax2 = space.dim() == 2 ? max_mode : 0;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Samples f(pts.size(), 0.0);
  for (int k1 = -kmax2; k1 <= kmax2; ++k1) {
    for (int k0 = 0; k0 <= max_mode; ++k0) {
      if (k0 == 0 && k1 <= 0) continue;  // each real mode once, no constant
      const double a = normal(rng), b = normal(rng);
      const double decay = 1.0 / (1.0 + k0 * k0 + k1 * k1);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const double ph = 2.0 * std::numbers::pi * (k0 * pts[i][0] / L[0] + k1 * pts[i][1] / L[1]);
        f[i] += decay * (a * std::cos(ph) + b * std::sin(ph));
      }
    }
  }
  double sup = 0.0;
  for (double v : f) sup = std::max(sup, std::abs(v));
  if (sup > 0.0) {
    for (double& v : f) v *= amplitude / sup;
  }
  return f;
}

SphereWeight SphereWeight::constant(int dim, double c) {
  SphereWeight w;
  w.c = c;
  w.b = Eigen::VectorXd::Zero(dim + 1);
  w.Q = Eigen::MatrixXd::Zero(dim + 1, dim + 1);
  return w;
}

SphereWeight SphereWeight::random(int dim, std::uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  SphereWeight w = constant(dim, 0.0);
  for (int i = 0; i <= dim; ++i) w.b[i] = amplitude * normal(rng);
  for (int i = 0; i <= dim; ++i) {
    for (int j = i; j <= dim; ++j) {
      w.Q(i, j) = w.Q(j, i) = 0.5 * amplitude * normal(rng);
    }
  }
  return w;
}

DiracOperator build_dirac(const ModelSpace& space, const Samples& f, Scheme scheme) {
  require(space.is_flat(), "Dirac operators are discretised on circles and flat tori only");
  require_matching(space, f);
  const SpinorOps ops(space, f, scheme);
  const auto dim = static_cast<Eigen::Index>(ops.rank * ops.points());
  DiracOperator out;
  out.matrix.resize(dim, dim);
  CVec e = CVec::Zero(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    e[j] = 1.0;
    out.matrix.col(j) = ops.dirac_f(e);
    e[j] = 0.0;
  }
  out.space = space;
  out.weight = f;
  out.scheme = scheme;
  out.rank = ops.rank;
  return out;
}

DiracOperator unitary_conjugate(const DiracOperator& op, const Samples& f, int direction) {
  require(direction == 1 || direction == -1, "direction must be +1 or -1");
  require(f.size() == op.weight.size(), "weight shape does not match the operator");
  const bool from_zero = std::all_of(op.weight.begin(), op.weight.end(), [](double v) { return v == 0.0; });
  if (direction == 1) {
    require(from_zero, "conjugation by +1 expects the unweighted operator D");
  } else {
    require(op.weight == f, "conjugation by -1 expects D_f for the same f");
  }
  const auto P = static_cast<Eigen::Index>(f.size());
  Eigen::VectorXd u(op.rank * P);
  for (int c = 0; c < op.rank; ++c) {
    for (Eigen::Index i = 0; i < P; ++i) u[c * P + i] = std::exp(0.5 * direction * f[static_cast<std::size_t>(i)]);
  }
  DiracOperator out = op;
  out.matrix = u.asDiagonal() * op.matrix * u.cwiseInverse().asDiagonal();
  out.weight = direction == 1 ? f : Samples(f.size(), 0.0);
  return out;
}

std::complex<double> weighted_inner(const DiracOperator& op, const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  const Eigen::VectorXd w = metric_weights(op);
  return a.dot(w.cast<C>().cwiseProduct(b));
}

Spectrum spectrum(const DiracOperator& op, std::size_t k) {
  const auto dim = op.matrix.rows();
  require(k >= 1 && k <= static_cast<std::size_t>(dim), "requested more eigenvalues than the matrix dimension");
  const Eigen::VectorXd w = metric_weights(op);
  const Eigen::VectorXd s = w.cwiseSqrt();
  const Eigen::MatrixXcd S = s.cast<C>().asDiagonal() * op.matrix * s.cwiseInverse().cast<C>().asDiagonal();
  const Eigen::MatrixXcd H = 0.5 * (S + S.adjoint());
  Spectrum out;
  out.hermitian_defect = (S - S.adjoint()).norm() / std::max(S.norm(), 1e-300);

  // eigenpairs of H; chiral: B = U Sigma V^H gives +-sigma with (u, +-v) / sqrt 2
  Eigen::VectorXd ev(dim);
  Eigen::MatrixXcd vecs(dim, dim);
  if (is_chiral(op, H)) {
    const Eigen::Index half = dim / 2;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(H.topRightCorner(half, half), Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success) throw NumericalError(kModule, "SVD did not converge");
    ev << svd.singularValues(), -svd.singularValues();
    vecs << svd.matrixU(), svd.matrixU(), svd.matrixV(), -svd.matrixV();
    vecs *= std::sqrt(0.5);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(H);
    if (solver.info() != Eigen::Success) throw NumericalError(kModule, "Hermitian eigensolver did not converge");
    ev = solver.eigenvalues();
    vecs = solver.eigenvectors();
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(ev[a]) < std::abs(ev[b]);
  });
  order.resize(k);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return ev[a] < ev[b]; });

  out.vectors.resize(dim, static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) {
    const Eigen::Index i = order[j];
    const double lambda = ev[i];
    const CVec v = s.cwiseInverse().cast<C>().cwiseProduct(vecs.col(i));
    const CVec r = op.matrix * v - lambda * v;
    const double nr = std::sqrt((r.cwiseAbs2().cwiseProduct(w)).sum());
    const double nv = std::sqrt((v.cwiseAbs2().cwiseProduct(w)).sum());
    out.eigenvalues.push_back(lambda);
    out.residuals.push_back(nr / nv);
    out.vectors.col(static_cast<Eigen::Index>(j)) = v / nv;
  }
  return out;
}

Eigen::VectorXcd random_spinor(const ModelSpace& space, std::uint64_t seed, int max_mode) {
  require(space.is_flat(), "random spinors are defined on flat model spaces only");
  const int dim = space.dim();
  const int rank = clifford::spinor_rank(dim);
  const auto pts = nodes(space);
  std::array<double, 2> L{1.0, 1.0}, phase{0.0, 0.0};
  if (const auto* c = std::get_if<Circle>(&space.kind)) {
    L[0] = c->length;
    phase[0] = c->spin == SpinStructure::trivial ? 0.5 : 0.0;
  } else {
    const auto& t = std::get<FlatTorus>(space.kind);
    L = t.lengths;
    for (int a = 0; a < 2; ++a) phase[a] = t.spin[a] == SpinStructure::trivial ? 0.5 : 0.0;
  }
  const int kmax1 = dim == 2 ? max_mode : 0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const auto P = static_cast<Eigen::Index>(pts.size());
  CVec psi = CVec::Zero(rank * P);
  for (int c = 0; c < rank; ++c) {
    for (int k1 = -kmax1; k1 <= kmax1; ++k1) {
      for (int k0 = -max_mode; k0 <= max_mode; ++k0) {
        const double decay = 1.0 / (1.0 + k0 * k0 + k1 * k1);
        const C a(normal(rng) * decay, normal(rng) * decay);
        for (Eigen::Index i = 0; i < P; ++i) {
          const auto& x = pts[static_cast<std::size_t>(i)];
          const double ph = 2.0 * std::numbers::pi *
                            ((k0 + phase[0]) * x[0] / L[0] + (dim == 2 ? (k1 + phase[1]) * x[1] / L[1] : 0.0));
          psi[c * P + i] += a * std::polar(1.0, ph);
        }
      }
    }
  }
  return psi;
}

double lichnerowicz_residual(const ModelSpace& space, const Samples& f, int trials, std::uint64_t seed,
                             Scheme scheme) {
  require_matching(space, f);
  const SpinorOps ops(space, f, scheme);
  const Samples rf = scalar_curvature_flat(ops.calc, f);
  const Eigen::VectorXd rf_vec = Eigen::Map<const Eigen::VectorXd>(rf.data(), static_cast<Eigen::Index>(rf.size()));
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const CVec psi = random_spinor(space, seed + static_cast<std::uint64_t>(t), 6);
    const CVec lhs = ops.dirac_f(ops.dirac_f(psi));
    const CVec rhs = -ops.laplacian_f(psi) + 0.25 * ops.times(rf_vec, psi);
    worst = std::max(worst, (lhs - rhs).norm() / psi.norm());
  }
  return worst;
}

double ricci_identity_residual(const ModelSpace& space, const Samples& f, int axis, int trials, std::uint64_t seed,
                               Scheme scheme) {
  require_matching(space, f);
  require(axis >= 0 && axis < space.dim(), "direction index out of range");
  const SpinorOps ops(space, f, scheme);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const CVec psi = random_spinor(space, seed + static_cast<std::uint64_t>(t), 6);
    const CVec commutator = ops.dirac_f(ops.d(psi, axis)) - ops.d(ops.dirac_f(psi), axis);
    const CVec rhs = 0.5 * ops.hess_clifford(axis, psi);
    worst = std::max(worst, (commutator - rhs).norm() / psi.norm());
  }
  return worst;
}

Samples weighted_scalar_curvature(const ModelSpace& space, const Samples& f, Scheme scheme) {
  require_matching(space, f);
  return scalar_curvature_flat(FlatCalculus(space, scheme), f);
}

namespace {

std::vector<Eigen::VectorXd> sphere_samples(const ModelSpace& sphere) {
  const auto& s = std::get<RoundSphere>(sphere.kind);
  const std::size_t m = sphere.resolution;
  std::vector<Eigen::VectorXd> out;
  if (s.dim == 2) {
    for (std::size_t i = 0; i <= m; ++i) {
      const double theta = std::numbers::pi * static_cast<double>(i) / static_cast<double>(m);
      for (std::size_t j = 0; j < 2 * m; ++j) {
        const double phi = std::numbers::pi * static_cast<double>(j) / static_cast<double>(m);
        Eigen::VectorXd x(3);
        x << std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta);
        out.push_back(x);
        if (i == 0 || i == m) break;
      }
    }
    return out;
  }
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  for (std::size_t k = 0; k < m * m * 4; ++k) {
    Eigen::VectorXd x(s.dim + 1);
    for (int i = 0; i <= s.dim; ++i) x[i] = normal(rng);
    out.push_back(x.normalized());
  }
  return out;
}

// lambda_min^2 of the weighted-symmetrised operator; chiral case from B^H B.
double smallest_eigenvalue_sq(const DiracOperator& op) {
  const Eigen::VectorXd s = metric_weights(op).cwiseSqrt();
  const Eigen::MatrixXcd S = s.cast<C>().asDiagonal() * op.matrix * s.cwiseInverse().cast<C>().asDiagonal();
  const Eigen::MatrixXcd H = 0.5 * (S + S.adjoint());
  if (!is_chiral(op, H)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(H, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError(kModule, "Hermitian eigensolver did not converge");
    return solver.eigenvalues().cwiseAbs2().minCoeff();
  }
  const Eigen::Index half = H.rows() / 2;
  const Eigen::MatrixXcd B = H.topRightCorner(half, half);
  const Eigen::MatrixXcd BB = B.adjoint() * B;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(BB, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError(kModule, "Hermitian eigensolver did not converge");
  return std::max(solver.eigenvalues().minCoeff(), 0.0);
}

}  // namespace

Samples weighted_scalar_curvature(const ModelSpace& sphere, const SphereWeight& f) {
  require(std::holds_alternative<RoundSphere>(sphere.kind), "expected a round sphere");
  const auto& s = std::get<RoundSphere>(sphere.kind);
  require(s.dim >= 2 && s.radius > 0.0, "sphere needs dimension >= 2 and positive radius");
  require(f.b.size() == s.dim + 1 && f.Q.rows() == s.dim + 1 && f.Q.cols() == s.dim + 1,
          "sphere weight has the wrong ambient dimension");
  const double n = s.dim;
  const double a2 = s.radius * s.radius;
  const double R = n * (n - 1.0) / a2;
  const Eigen::MatrixXd hess = 2.0 * f.Q;
  Samples out;
  for (const Eigen::VectorXd& x : sphere_samples(sphere)) {
    const Eigen::VectorXd grad = f.b + hess * x;
    const double radial = x.dot(grad);
    const Eigen::VectorXd tangential = grad - radial * x;
    const double lap = hess.trace() - n * radial - x.dot(hess * x);
    out.push_back(R + (2.0 * lap - tangential.squaredNorm()) / a2);
  }
  return out;
}

FriedrichCheck friedrich_check(const ModelSpace& space, const Samples& f, double tolerance) {
  require_matching(space, f);
  const int n = space.dim();
  require(n >= 2, "the Friedrich bound needs dimension at least 2");
  const DiracOperator op = build_dirac(space, f);
  const Samples rf = weighted_scalar_curvature(space, f);
  FriedrichCheck out;
  out.lhs = smallest_eigenvalue_sq(op);
  out.rhs = n / (4.0 * (n - 1.0)) * *std::min_element(rf.begin(), rf.end());
  out.margin = out.lhs - out.rhs;
  out.equality = std::abs(out.margin) <= tolerance;
  return out;
}

FriedrichCheck friedrich_check(const ModelSpace& sphere, const SphereWeight& f, double tolerance) {
  const Samples rf = weighted_scalar_curvature(sphere, f);
  const auto& s = std::get<RoundSphere>(sphere.kind);
  const double n = s.dim;
  // D_f is unitarily equivalent to D, whose spectrum is known in closed form.
  const double lambda = sphere_dirac_spectrum(s, 1).front();
  FriedrichCheck out;
  out.lhs = lambda * lambda;
  out.rhs = n / (4.0 * (n - 1.0)) * *std::min_element(rf.begin(), rf.end());
  out.margin = out.lhs - out.rhs;
  out.equality = std::abs(out.margin) <= tolerance;
  return out;
}

std::vector<double> sphere_dirac_spectrum(const RoundSphere& sphere, std::size_t count) {
  require(sphere.dim >= 2 && sphere.radius > 0.0, "sphere needs dimension >= 2 and positive radius");
  const int n = sphere.dim;
  const double rank = std::ldexp(1.0, n / 2);
  std::vector<double> out;
  for (int k = 0; out.size() < count; ++k) {
    // multiplicity of +-(n/2 + k): rank * binom(k + n - 1, k)
    double mult = rank;
    for (int j = 1; j <= k; ++j) mult = mult * (n - 1 + j) / j;
    const double value = (0.5 * n + k) / sphere.radius;
    for (double m = 0; m < mult && out.size() < count; ++m) out.push_back(-value);
    for (double m = 0; m < mult && out.size() < count; ++m) out.push_back(value);
  }
  return out;
}

Samples sphere_latitudes(const ModelSpace& sphere) {
  require(std::holds_alternative<RoundSphere>(sphere.kind), "expected a round sphere");
  Samples theta(sphere.resolution);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    theta[i] = std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(sphere.resolution);
  }
  return theta;
}

namespace {

double conformal_ground_state(const ModelSpace& space, const Samples& potential, double coefficient) {
  require(space.resolution >= 32, "resolution must be at least 32");
  if (const auto* s = std::get_if<RoundSphere>(&space.kind)) {
    // Zonal ground state: conservative differences in theta with the
    // sin^{n-1} measure; the flux vanishes at both poles.
    const std::size_t m = space.resolution;
    const double n = s->dim;
    const double h = std::numbers::pi / static_cast<double>(m);
    const double a2 = s->radius * s->radius;
    const Samples theta = sphere_latitudes(space);
    const double R = n * (n - 1.0) / a2;
    require(potential.empty() || potential.size() == m, "zonal potential must be sampled at the latitude centres");
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    Eigen::VectorXd mass(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      mass[ii] = std::pow(std::sin(theta[i]), n - 1.0);
      A(ii, ii) += (potential.empty() ? R : potential[i]) * mass[ii];
      if (i + 1 < m) {
        const double face = std::pow(std::sin(theta[i] + 0.5 * h), n - 1.0) * coefficient / (h * h * a2);
        A(ii, ii) += face;
        A(ii + 1, ii + 1) += face;
        A(ii, ii + 1) -= face;
        A(ii + 1, ii) -= face;
      }
    }
    const Eigen::VectorXd s_inv = mass.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd S = s_inv.asDiagonal() * A * s_inv.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(S, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError(kModule, "eigensolver did not converge");
    return solver.eigenvalues()[0];
  }
  // Flat spaces: R = 0, spectral Laplacian assembled column by column.
  const FlatCalculus calc(space, Scheme::spectral);
  const auto P = static_cast<Eigen::Index>(calc.points());
  require(potential.empty() || potential.size() == calc.points(), "potential is not sampled on the space's grid");
  Eigen::MatrixXd A(P, P);
  CVec e = CVec::Zero(P);
  for (Eigen::Index j = 0; j < P; ++j) {
    e[j] = 1.0;
    CVec lap = CVec::Zero(P);
    for (int a = 0; a < calc.dim(); ++a) lap += calc.derivative(e, a, 2, false);
    A.col(j) = -coefficient * lap.real();
    if (!potential.empty()) A(j, j) += potential[static_cast<std::size_t>(j)];
    e[j] = 0.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError(kModule, "eigensolver did not converge");
  return solver.eigenvalues()[0];
}

}  // namespace

double lambda_p(const ModelSpace& space, const Samples& potential) {
  return conformal_ground_state(space, potential, 4.0);
}

double mu_1(const ModelSpace& space, const Samples& potential) {
  const int n = space.dim();
  if (n <= 2) throw PreconditionError(kModule, "the conformal Laplacian needs dimension at least 3");
  return conformal_ground_state(space, potential, 4.0 * (n - 1.0) / (n - 2.0));
}

}  // namespace wsl::dirac
