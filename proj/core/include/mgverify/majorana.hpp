#pragma once

#include <vector>

#include "mgverify/matchgate.hpp"
#include "mgverify/pauli.hpp"
#include "mgverify/types.hpp"

namespace mgv {

// Jordan-Wigner convention (0-based): c_{2k} = Z^{(k)} X_k, c_{2k+1} = Z^{(k)} Y_k,
// where Z^{(k)} is Z on every qubit before k.

/// 4x4 orthogonal block R with U a_i U^dag = sum_j R_ij a_j for the four
/// Majorana operators local to the gate's pair.
Eigen::Matrix4d matchgate_orthogonal_block(const Mat4& u);

/// 2n x 2n orthogonal R with U c_i U^dag = sum_j R_ij c_j; identity outside
/// modes 2k..2k+3 for a gate on (k, k+1).
RMatrix matchgate_orthogonal(const Matchgate& m, int n);

/// s_i in P c_i P = s_i c_i, for i = 0..2n-1.
std::vector<int> pauli_conjugation_signs(const PauliString& p);

/// Dense Majorana operator c_i on n qubits (oracle use; n small).
CMatrix majorana_dense(int i, int n);

}  // namespace mgv
