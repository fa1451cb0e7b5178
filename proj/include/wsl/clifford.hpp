#pragma once

#include <Eigen/Dense>
#include <vector>

namespace wsl::clifford {

/// 2^{floor(n/2)}
int spinor_rank(int n);

/// Skew-Hermitian generators with e_i e_j + e_j e_i = -2 delta_ij, built as
/// -i times Jordan-Wigner strings of Pauli matrices. For n = 1 this is the
/// 1x1 matrix -i, so the circle Dirac operator is -i d/dtheta.
std::vector<Eigen::MatrixXcd> gamma_matrices(int n);

/// max_{i,j} || e_i e_j + e_j e_i + 2 delta_ij || (entrywise max norm).
double anticommutator_defect(const std::vector<Eigen::MatrixXcd>& gammas);

}  // namespace wsl::clifford
