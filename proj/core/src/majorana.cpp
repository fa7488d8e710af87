#include "mgverify/majorana.hpp"

namespace mgv {

Eigen::Matrix4d matchgate_orthogonal_block(const Mat4& u) {
  const Mat2 i2 = pauli_matrix(Pauli::I), x = pauli_matrix(Pauli::X), y = pauli_matrix(Pauli::Y),
             z = pauli_matrix(Pauli::Z);
  const Mat4 a[4] = {kron(x, i2), kron(y, i2), kron(z, x), kron(z, y)};
  Eigen::Matrix4d r;
  for (int i = 0; i < 4; ++i) {
    const Mat4 conj = u * a[i] * u.adjoint();
    for (int j = 0; j < 4; ++j) r(i, j) = (a[j] * conj).trace().real() / 4.0;
  }
  return r;
}

RMatrix matchgate_orthogonal(const Matchgate& m, int n) {
  if (m.second() >= n) throw ValidationError("matchgate_orthogonal: gate outside register");
  RMatrix r = RMatrix::Identity(2 * n, 2 * n);
  r.block<4, 4>(2 * m.first(), 2 * m.first()) = matchgate_orthogonal_block(m.matrix());
  return r;
}

std::vector<int> pauli_conjugation_signs(const PauliString& p) {
  const std::size_t n = p.size();
  std::vector<int> signs(2 * n);
  // Parity of letters anticommuting with the Z string to the left of qubit k.
  unsigned left = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const Pauli l = p[k];
    const unsigned anti_x = (l == Pauli::Y || l == Pauli::Z);
    const unsigned anti_y = (l == Pauli::X || l == Pauli::Z);
    signs[2 * k] = ((left + anti_x) % 2) ? -1 : 1;
    signs[2 * k + 1] = ((left + anti_y) % 2) ? -1 : 1;
    left += has_x(l);
  }
  return signs;
}

CMatrix majorana_dense(int i, int n) {
  if (i < 0 || i >= 2 * n) throw ValidationError("majorana index out of range");
  const int k = i / 2;
  PauliString p(n);
  for (int q = 0; q < k; ++q) p.set(q, Pauli::Z);
  p.set(k, (i % 2 == 0) ? Pauli::X : Pauli::Y);
  // Phases: X, Y, Z strings carry no extra phase in pauli_dense.
  return pauli_dense(p);
}

}  // namespace mgv
