#include "mgverify/matchgate.hpp"

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

namespace mgv {

namespace {

// Parity-block positions within the 4x4 basis {00, 01, 10, 11}.
constexpr int kEven[2] = {0, 3};
constexpr int kOdd[2] = {1, 2};

Mat4 term_matrix(std::string_view term) {
  return kron(pauli_matrix(pauli_from_char(term[0])), pauli_matrix(pauli_from_char(term[1])));
}

}  // namespace

Mat2 hadamard() {
  Mat2 h;
  h << 1, 1, 1, -1;
  return h / std::sqrt(2.0);
}

Mat4 cz_matrix() {
  Mat4 m = Mat4::Identity();
  m(3, 3) = -1;
  return m;
}

Mat4 fswap_matrix() {
  Mat4 m = Mat4::Zero();
  m(0, 0) = 1;
  m(1, 2) = 1;
  m(2, 1) = 1;
  m(3, 3) = -1;
  return m;
}

Mat4 kron(const Mat2& a, const Mat2& b) {
  Mat4 m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return m;
}

bool is_unitary(const CMatrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  const CMatrix d = u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols());
  return d.cwiseAbs().maxCoeff() <= tol;
}

Mat4 GateGenerator::hamiltonian() const {
  Mat4 h = Mat4::Zero();
  for (std::size_t t = 0; t < kGeneratorTerms.size(); ++t) h += coeffs[t] * term_matrix(kGeneratorTerms[t]);
  return h;
}

Mat4 GateGenerator::unitary() const {
  const Mat4 ih = cplx(0, 1) * hamiltonian();
  return std::exp(cplx(0, phase)) * Mat4(ih.exp());
}

bool is_matchgate(const Mat4& u, double tol) {
  if (!is_unitary(u, tol)) throw ValidationError("is_matchgate: input is not unitary");
  for (int a : kEven)
    for (int b : kOdd)
      if (std::abs(u(a, b)) > tol || std::abs(u(b, a)) > tol) return false;
  Mat2 even, odd;
  even << u(0, 0), u(0, 3), u(3, 0), u(3, 3);
  odd << u(1, 1), u(1, 2), u(2, 1), u(2, 2);
  return std::abs(even.determinant() - odd.determinant()) <= tol;
}

Matchgate Matchgate::from_pair(const Mat2& even, const Mat2& odd, int first_qubit) {
  if (!is_unitary(even) || !is_unitary(odd)) throw ValidationError("invalid matchgate: blocks are not unitary");
  if (std::abs(even.determinant() - odd.determinant()) > kGateTolerance)
    throw ValidationError("invalid matchgate: det U1 != det U2");
  if (first_qubit < 0) throw ValidationError("invalid matchgate: negative qubit index");
  Mat4 u = Mat4::Zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      u(kEven[i], kEven[j]) = even(i, j);
      u(kOdd[i], kOdd[j]) = odd(i, j);
    }
  return Matchgate(u, first_qubit);
}

Matchgate Matchgate::from_matrix(const Mat4& u, int first_qubit) {
  if (first_qubit < 0) throw ValidationError("invalid matchgate: negative qubit index");
  if (!is_matchgate(u)) throw ValidationError("invalid matchgate: parity block structure violated");
  return Matchgate(u, first_qubit);
}

Mat2 Matchgate::even_block() const {
  Mat2 b;
  b << u_(0, 0), u_(0, 3), u_(3, 0), u_(3, 3);
  return b;
}

Mat2 Matchgate::odd_block() const {
  Mat2 b;
  b << u_(1, 1), u_(1, 2), u_(2, 1), u_(2, 2);
  return b;
}

GateGenerator Matchgate::generator() const {
  // exp(i*phase) from the common block determinant, then H = -i log(U e^{-i phase}).
  const cplx det = even_block().determinant();
  GateGenerator g;
  g.phase = std::arg(det) / 2.0;
  const Mat4 reduced = u_ * std::exp(cplx(0, -g.phase));
  const Mat4 h = cplx(0, -1) * Mat4(reduced.log());
  for (std::size_t t = 0; t < kGeneratorTerms.size(); ++t)
    g.coeffs[t] = (term_matrix(kGeneratorTerms[t]) * h).trace().real() / 4.0;
  // The branch of the logarithm may leave an identity component; fold it into the phase.
  g.phase += h.trace().real() / 4.0;
  return g;
}

Matchgate pauli_conjugated_matchgate(const Matchgate& m, const PauliString& p) {
  const PauliString local = p.size() == 2 ? p : [&] {
    const int qs[2] = {m.first(), m.second()};
    return p.restricted(qs);
  }();
  const Mat4 pm = kron(pauli_matrix(local[0]), pauli_matrix(local[1]));
  return Matchgate(pm * m.matrix() * pm.adjoint(), m.first());
}

Matchgate fswap(int first_qubit) { return Matchgate::from_matrix(fswap_matrix(), first_qubit); }

GateGenerator fswap_generator() {
  // fSWAP = -i * exp(i*pi/4 (XX + YY + ZI + IZ)).
  GateGenerator g;
  const double q = std::numbers::pi / 4.0;
  g.coeffs = {q, 0.0, 0.0, q, q, q};
  g.phase = -std::numbers::pi / 2.0;
  return g;
}

}  // namespace mgv
