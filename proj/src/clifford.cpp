#include "wsl/clifford.hpp"

#include <complex>
#include <unsupported/Eigen/KroneckerProduct>

#include "wsl/error.hpp"

namespace wsl::clifford {

namespace {

using C = std::complex<double>;

Eigen::Matrix2cd pauli(char which) {
  Eigen::Matrix2cd m;
  switch (which) {
    case 'x': m << 0, 1, 1, 0; break;
    case 'y': m << 0, C(0, -1), C(0, 1), 0; break;
    case 'z': m << 1, 0, 0, -1; break;
    default: m.setIdentity();
  }
  return m;
}

// Tensor product of single-site factors, site 0 leftmost.
Eigen::MatrixXcd string_of(const std::vector<char>& sites) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  for (char s : sites) {
    Eigen::MatrixXcd next = Eigen::kroneckerProduct(out, pauli(s)).eval();
    out = std::move(next);
  }
  return out;
}

}  // namespace

int spinor_rank(int n) {
  if (n < 1) throw PreconditionError("clifford", "dimension must be positive");
  return 1 << (n / 2);
}

std::vector<Eigen::MatrixXcd> gamma_matrices(int n) {
  const int m = n / 2;
  (void)spinor_rank(n);
  std::vector<Eigen::MatrixXcd> out;
  for (int j = 0; j < m; ++j) {
    for (char p : {'x', 'y'}) {
      std::vector<char> sites(static_cast<std::size_t>(m), 'i');
      for (int q = 0; q < j; ++q) sites[static_cast<std::size_t>(q)] = 'z';
      sites[static_cast<std::size_t>(j)] = p;
      out.push_back(C(0, -1) * string_of(sites));
    }
  }
  if (n % 2 == 1) out.push_back(C(0, -1) * string_of(std::vector<char>(static_cast<std::size_t>(m), 'z')));
  return out;
}

double anticommutator_defect(const std::vector<Eigen::MatrixXcd>& gammas) {
  double worst = 0.0;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    for (std::size_t j = 0; j < gammas.size(); ++j) {
      Eigen::MatrixXcd a = gammas[i] * gammas[j] + gammas[j] * gammas[i];
      if (i == j) a += 2.0 * Eigen::MatrixXcd::Identity(a.rows(), a.cols());
      worst = std::max(worst, a.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

}  // namespace wsl::clifford
