#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mgverify/circuit.hpp"
#include "mgverify/dense.hpp"
#include "mgverify/noise.hpp"
#include "mgverify/rng.hpp"

namespace mgv {

/// Pure fermionic Gaussian state: Gamma_ij = i tr(rho c_i c_j), 2n x 2n.
/// Vacuum blocks are [[0, -1], [1, 0]]; p(x_k = 1) = (1 + Gamma_{2k,2k+1}) / 2.
class CovarianceState {
 public:
  explicit CovarianceState(int n);  ///< |0...0>
  /// Validates antisymmetry (1e-9) and purity (1e-8).
  static CovarianceState from_matrix(RMatrix gamma);

  int size() const { return n_; }
  const RMatrix& gamma() const { return g_; }

  /// Gamma <- R Gamma R^T. Throws ValidationError if R is not orthogonal.
  void apply_orthogonal(const RMatrix& r);
  /// Gamma <- S Gamma S^T with S = 1 except the 4x4 block s at modes m..m+3.
  void apply_block(const Eigen::Matrix4d& s, int mode);
  void apply_matchgate(const Matchgate& m);
  void apply_pauli(const PauliString& p);
  /// Same as apply_pauli for `word` placed on `qubits`; touches only the
  /// flipped modes (or their complement, whichever is smaller).
  void apply_local_pauli(const PauliString& word, std::span<const int> qubits);
  /// Gamma <- D Gamma D for a +-1 sign vector.
  void apply_signs(const RVector& d);

  double prob1(int k) const;
  /// Normalized projection onto outcome; returns its probability. Only
  /// modes >= first_mode are updated (earlier modes must be decoupled).
  double project(int k, int outcome, int first_mode = 0);

  double purity_error() const;  ///< ||Gamma Gamma^T - I||_max
  bool is_antisymmetric(double tol = 1e-9) const;
  /// Polar projection when purity_error exceeds 1e-8; returns true if done.
  bool reorthogonalize_if_needed();
  int reorthogonalizations() const { return reorth_; }

 private:
  void flip_mode(Eigen::Index i);

  int n_ = 0;
  RMatrix g_;
  int reorth_ = 0;
};

/// S block such that a matchgate acts as Gamma <- S Gamma S^T on its modes.
Eigen::Matrix4d covariance_block(const Matchgate& m);

/// p(x_k = 1 | x_0..x_{k-1}) along the given bitstring, for k < bits.size().
std::vector<double> conditional_marginals(CovarianceState s, const Bitstring& bits);

/// Exact output distribution of the leading `qubits` qubits, by walking the
/// conditional tree; branches below `cutoff` are dropped.
std::vector<std::pair<std::uint64_t, double>> exact_distribution(const CovarianceState& s, int qubits, double cutoff = 0.0);

struct WeakSample {
  Bitstring bits;
  std::map<std::string, int> outcomes;
  /// (op index, full-width word) for every non-identity sampled error.
  std::vector<std::pair<std::size_t, PauliString>> paulis;
};

/// Deterministic run of a Gaussian-compatible circuit with imposed outcomes.
/// Returns the final state; `probability` receives the product of outcome
/// probabilities.
CovarianceState run_gaussian(const Circuit& c, const std::map<std::string, int>& forced, double* probability = nullptr);

/// Weak simulator for matchgate circuits with Paulis, Z measurements and
/// Pauli corrections. The noiseless prefix is evolved once and shared.
class WeakSampler {
 public:
  WeakSampler(const Circuit& c, NoiseBindings bindings);
  explicit WeakSampler(const Circuit& c);

  WeakSample sample(Rng& rng) const;
  Bitstring sample_bits(Rng& rng) const;
  std::vector<Bitstring> sample(std::size_t shots, Rng& rng) const;

  const CovarianceState& prefix_state() const { return prefix_; }
  std::size_t prefix_length() const { return prefix_len_; }
  int data_width() const { return data_width_; }

 private:
  struct Compiled;
  WeakSample run(Rng& rng, bool record) const;

  int width_ = 0;
  int data_width_ = 0;
  NoiseBindings bindings_;
  std::vector<std::string> labels_;
  std::vector<std::shared_ptr<const Compiled>> ops_;
  CovarianceState prefix_{0};
  std::size_t prefix_len_ = 0;
  std::vector<double> readout_eps_;
};

/// One draw from the RC'd noisy output distribution of `c`.
WeakSample weak_sample(const Circuit& c, const NoiseBindings& b, Rng& rng);

}  // namespace mgv
