#pragma once

#include <array>
#include <string_view>

#include "mgverify/pauli.hpp"
#include "mgverify/types.hpp"

namespace mgv {

/// Two-qubit Pauli terms spanning matchgate generators: XX, XY, YX, YY, ZI, IZ.
inline constexpr std::array<std::string_view, 6> kGeneratorTerms = {"XX", "XY", "YX", "YY", "ZI", "IZ"};

/// Matchgate written as exp(i * phase) * exp(i * sum_P coeff[P] * P).
struct GateGenerator {
  std::array<double, 6> coeffs{};
  double phase = 0.0;

  Mat4 hamiltonian() const;  ///< sum_P coeff[P] * P (no phase)
  Mat4 unitary() const;      ///< exp(i*phase) * exp(i*H)
};

Mat2 hadamard();
Mat4 cz_matrix();
Mat4 fswap_matrix();
Mat4 kron(const Mat2& a, const Mat2& b);

bool is_unitary(const CMatrix& u, double tol = kGateTolerance);

/// 4x4 unitary G(U1, U2) acting on an adjacent pair (q, q+1). The basis is
/// |x_q x_{q+1}>, with x_q the more significant bit; U1 acts on the even
/// parity block span{|00>,|11>} and U2 on span{|01>,|10>}. Immutable.
class Matchgate {
 public:
  /// Throws ValidationError("invalid matchgate ...") when det U1 != det U2.
  static Matchgate from_pair(const Mat2& even, const Mat2& odd, int first_qubit);
  /// Validates unitarity and the matchgate block structure.
  static Matchgate from_matrix(const Mat4& u, int first_qubit);

  const Mat4& matrix() const { return u_; }
  int first() const { return q_; }
  int second() const { return q_ + 1; }
  Mat2 even_block() const;
  Mat2 odd_block() const;

  /// Normal-form view computed from the matrix (principal logarithm).
  GateGenerator generator() const;

  Matchgate retargeted(int first_qubit) const { return Matchgate(u_, first_qubit); }

 private:
  friend Matchgate pauli_conjugated_matchgate(const Matchgate& m, const PauliString& p);
  Matchgate(const Mat4& u, int q) : u_(u), q_(q) {}
  Mat4 u_;
  int q_ = 0;
};

/// True iff the parity off-diagonal blocks vanish and det U1 == det U2.
/// Throws ValidationError when u is not unitary.
bool is_matchgate(const Mat4& u, double tol = kGateTolerance);

/// P M P for a word P; letters outside the gate's pair are ignored.
Matchgate pauli_conjugated_matchgate(const Matchgate& m, const PauliString& p);

Matchgate fswap(int first_qubit);
GateGenerator fswap_generator();

}  // namespace mgv
