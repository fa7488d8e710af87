#include "mgverify/pauli.hpp"

#include <bit>

namespace mgv {

char to_char(Pauli p) {
  switch (p) {
    case Pauli::I: return 'I';
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  return '?';
}

Pauli pauli_from_char(char c) {
  switch (c) {
    case 'I': case 'i': return Pauli::I;
    case 'X': case 'x': return Pauli::X;
    case 'Y': case 'y': return Pauli::Y;
    case 'Z': case 'z': return Pauli::Z;
    default: throw ValidationError(std::string("invalid Pauli letter '") + c + "'");
  }
}

PauliString PauliString::parse(std::string_view word) {
  PauliString p(word.size());
  for (std::size_t q = 0; q < word.size(); ++q) p.letters_[q] = pauli_from_char(word[q]);
  return p;
}

PauliString PauliString::single(std::size_t n, std::size_t qubit, Pauli letter) {
  if (qubit >= n) throw ValidationError("Pauli qubit index out of range");
  PauliString p(n);
  p.letters_[qubit] = letter;
  return p;
}

std::vector<std::size_t> PauliString::support() const {
  std::vector<std::size_t> s;
  for (std::size_t q = 0; q < letters_.size(); ++q)
    if (letters_[q] != Pauli::I) s.push_back(q);
  return s;
}

std::size_t PauliString::weight() const {
  std::size_t w = 0;
  for (auto l : letters_) w += (l != Pauli::I);
  return w;
}

bool PauliString::is_identity() const { return weight() == 0; }

bool PauliString::commutes_with(const PauliString& other) const {
  if (other.size() != size()) throw ValidationError("Pauli length mismatch");
  unsigned anti = 0;
  for (std::size_t q = 0; q < size(); ++q) {
    const Pauli a = letters_[q], b = other.letters_[q];
    anti += (a != Pauli::I && b != Pauli::I && a != b);
  }
  return anti % 2 == 0;
}

PauliString PauliString::restricted(std::span<const int> qubits) const {
  PauliString out(qubits.size());
  for (std::size_t i = 0; i < qubits.size(); ++i) out.letters_[i] = letters_.at(qubits[i]);
  return out;
}

PauliString PauliString::embedded(std::size_t n, std::span<const int> qubits) const {
  if (qubits.size() != size()) throw ValidationError("embedding support size mismatch");
  PauliString out(n);
  for (std::size_t i = 0; i < qubits.size(); ++i) {
    if (qubits[i] < 0 || static_cast<std::size_t>(qubits[i]) >= n)
      throw ValidationError("embedding qubit out of range");
    out.letters_[qubits[i]] = letters_[i];
  }
  return out;
}

std::uint64_t PauliString::x_mask() const {
  std::uint64_t m = 0;
  const std::size_t n = size();
  for (std::size_t q = 0; q < n; ++q)
    if (has_x(letters_[q])) m |= std::uint64_t{1} << (n - 1 - q);
  return m;
}

std::uint64_t PauliString::z_mask() const {
  std::uint64_t m = 0;
  const std::size_t n = size();
  for (std::size_t q = 0; q < n; ++q)
    if (has_z(letters_[q])) m |= std::uint64_t{1} << (n - 1 - q);
  return m;
}

std::string PauliString::str() const {
  std::string s(letters_.size(), 'I');
  for (std::size_t q = 0; q < letters_.size(); ++q) s[q] = to_char(letters_[q]);
  return s;
}

PauliString pauli_mul(const PauliString& a, const PauliString& b) {
  if (a.size() != b.size()) throw ValidationError("pauli_mul: length mismatch");
  PauliString out(a.size());
  for (std::size_t q = 0; q < a.size(); ++q) out.set(q, a[q] * b[q]);
  return out;
}

std::vector<PauliString> all_paulis(std::size_t k) {
  const std::size_t count = std::size_t{1} << (2 * k);
  std::vector<PauliString> out;
  out.reserve(count);
  for (std::size_t code = 0; code < count; ++code) {
    PauliString p(k);
    for (std::size_t q = 0; q < k; ++q)
      p.set(q, static_cast<Pauli>((code >> (2 * (k - 1 - q))) & 3u));
    out.push_back(std::move(p));
  }
  return out;
}

Mat2 pauli_matrix(Pauli p) {
  using namespace std::complex_literals;
  Mat2 m;
  switch (p) {
    case Pauli::I: m << 1, 0, 0, 1; break;
    case Pauli::X: m << 0, 1, 1, 0; break;
    case Pauli::Y: m << 0, -1i, 1i, 0; break;
    case Pauli::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

CMatrix pauli_dense(const PauliString& p) {
  const std::size_t n = p.size();
  const std::size_t dim = std::size_t{1} << n;
  const std::uint64_t xm = p.x_mask(), zm = p.z_mask();
  std::size_t ny = 0;
  for (std::size_t q = 0; q < n; ++q) ny += (p[q] == Pauli::Y);
  // Y = i X Z, so P|b> = i^{#Y} (-1)^{b.z} |b ^ x>.
  static const cplx ipow[4] = {1.0, cplx(0, 1), -1.0, cplx(0, -1)};
  const cplx base = ipow[ny % 4];
  CMatrix m = CMatrix::Zero(dim, dim);
  for (std::size_t b = 0; b < dim; ++b) {
    const double sign = (std::popcount(b & zm) % 2) ? -1.0 : 1.0;
    m(b ^ xm, b) = base * sign;
  }
  return m;
}

}  // namespace mgv
