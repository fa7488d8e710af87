#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mgverify/types.hpp"

namespace mgv {

/// Single-qubit Pauli letter. The encoding packs (x, z) bits so that the
/// phase-free product of two letters is their XOR.
enum class Pauli : std::uint8_t { I = 0, X = 1, Z = 2, Y = 3 };

inline constexpr bool has_x(Pauli p) { return (static_cast<unsigned>(p) & 1u) != 0; }
inline constexpr bool has_z(Pauli p) { return (static_cast<unsigned>(p) & 2u) != 0; }
inline constexpr Pauli operator*(Pauli a, Pauli b) {
  return static_cast<Pauli>(static_cast<unsigned>(a) ^ static_cast<unsigned>(b));
}
char to_char(Pauli p);
Pauli pauli_from_char(char c);

/// n-qubit Pauli word with phases dropped.
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::size_t n) : letters_(n, Pauli::I) {}

  static PauliString parse(std::string_view word);
  static PauliString single(std::size_t n, std::size_t qubit, Pauli letter);

  std::size_t size() const { return letters_.size(); }
  Pauli operator[](std::size_t q) const { return letters_[q]; }
  void set(std::size_t q, Pauli p) { letters_.at(q) = p; }

  std::vector<std::size_t> support() const;
  std::size_t weight() const;
  bool is_identity() const;
  bool commutes_with(const PauliString& other) const;

  /// Letters at the listed qubits, as a word of length qubits.size().
  PauliString restricted(std::span<const int> qubits) const;
  /// Places this (local) word onto `qubits` of an n-qubit identity word.
  PauliString embedded(std::size_t n, std::span<const int> qubits) const;

  /// Bit masks with qubit q at bit (n-1-q), matching the dense index order.
  std::uint64_t x_mask() const;
  std::uint64_t z_mask() const;

  std::string str() const;

  auto operator<=>(const PauliString&) const = default;
  bool operator==(const PauliString&) const = default;

 private:
  std::vector<Pauli> letters_;
};

/// Letterwise product, phase discarded. Throws ValidationError on length mismatch.
PauliString pauli_mul(const PauliString& a, const PauliString& b);

/// All 4^k words on k qubits, in lexicographic I<X<Z<Y order of the enum.
std::vector<PauliString> all_paulis(std::size_t k);

Mat2 pauli_matrix(Pauli p);
/// Dense 2^n x 2^n matrix; qubit 0 is the most significant tensor factor.
CMatrix pauli_dense(const PauliString& p);

}  // namespace mgv
