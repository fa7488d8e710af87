#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mgverify/circuit.hpp"
#include "mgverify/noise.hpp"
#include "mgverify/rng.hpp"

namespace mgv {

/// Computational-basis outcome, one entry per qubit (qubit 0 first).
using Bitstring = std::vector<std::uint8_t>;

std::string to_string(const Bitstring& b);
Bitstring parse_bitstring(std::string_view s);
/// Dense index with qubit 0 as the most significant bit.
std::uint64_t bits_index(const Bitstring& b);
Bitstring index_bits(std::uint64_t index, int n);

/// Maximum width accepted by the dense engines.
inline constexpr int kMaxDenseQubits = 14;

/// Applies a 2^k x 2^k matrix to `qubits` of a 2^nbits amplitude array whose
/// qubit q sits at bit (nbits - 1 - q). qubits[0] is the most significant
/// local factor. k <= 4.
void apply_local(cplx* data, int nbits, std::span<const int> qubits, const CMatrix& m);

class StateVector {
 public:
  explicit StateVector(int n);  ///< |0...0>
  static StateVector from_amplitudes(CVector amp);

  int size() const { return n_; }
  const CVector& amplitudes() const { return amp_; }
  CVector& amplitudes() { return amp_; }

  void apply_matrix(const CMatrix& m, std::span<const int> qubits);
  void apply_pauli(const PauliString& p);
  /// Gates only (u1, matchgate, CZ, Pauli).
  void apply_gate(const CircuitOp& op);

  double prob1(int q) const;
  /// Projects onto the outcome and renormalizes; returns its probability.
  /// Throws SimulationError for a zero-probability outcome.
  double project(int q, int outcome);
  int measure(int q, Rng& rng);

  RVector probabilities() const;
  double norm() const { return amp_.norm(); }

 private:
  int n_ = 0;
  CVector amp_;
};

class DensityMatrix {
 public:
  explicit DensityMatrix(int n);  ///< |0...0><0...0|
  static DensityMatrix from_state(const StateVector& s);
  static DensityMatrix from_matrix(CMatrix rho);

  int size() const { return n_; }
  const CMatrix& matrix() const { return rho_; }

  void apply_matrix(const CMatrix& m, std::span<const int> qubits);
  void apply_pauli(const PauliString& p);
  void apply_gate(const CircuitOp& op);
  void apply_channel(const BoundPauliChannel& c);
  void apply_channel(const LocalChannel& c);

  double prob1(int q) const;
  /// Normalized projection; returns the outcome probability.
  double project(int q, int outcome);
  /// Non-selective Z measurement.
  void dephase(int q);
  /// sum_o P_o Pi_o rho Pi_o P_o over the outcome records held on `record`.
  void apply_correction(const CorrectionOp& c, std::span<const int> record);

  RVector diagonal() const;
  double trace() const { return rho_.trace().real(); }
  /// Reduced state of the leading `keep` qubits.
  DensityMatrix leading_marginal(int keep) const;

 private:
  int n_ = 0;
  CMatrix rho_;
};

/// Exact RC output: each op followed by its twirled channel, measurements as
/// non-selective with adaptive corrections applied per outcome record.
/// Returns the data-register state after final readout channels.
DensityMatrix rc_output_state(const Circuit& c, const NoiseBindings& b);

/// Average over `trials` statevector trajectories with sampled Paulis and
/// sampled measurement outcomes.
DensityMatrix mc_rc_output_state(const Circuit& c, const NoiseBindings& b, std::size_t trials, Rng& rng);

struct Trajectory {
  StateVector state;
  std::map<std::string, int> outcomes;
  double probability = 1.0;  ///< product of outcome probabilities
};

/// Single trajectory. Outcomes listed in `forced` are imposed; the others are
/// drawn with `rng` (required then). Bindings are sampled when given.
Trajectory run_trajectory(const Circuit& c, const NoiseBindings* b, const std::map<std::string, int>& forced, Rng* rng);

double diag_distance(const RVector& p, const RVector& q);
double diag_distance(const DensityMatrix& rho, const DensityMatrix& sigma);
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Walker-free inverse-CDF sampling of M indices from a probability vector.
std::vector<std::uint64_t> sample_indices(const RVector& probs, std::size_t shots, Rng& rng);
std::vector<Bitstring> sample_bitstrings(const RVector& probs, int n, std::size_t shots, Rng& rng);

double encoded_subspace_weight(const RVector& probs, int n);
double encoded_subspace_weight(const DensityMatrix& rho);

/// Covariance matrix Gamma_ij = i <c_i c_j> of a pure state (oracle use).
RMatrix covariance_of(const StateVector& s);

void write_state(const std::string& path, const StateVector& s);
void write_state(const std::string& path, const DensityMatrix& rho);
/// Reads either kind; a statevector is returned as its projector.
DensityMatrix read_state(const std::string& path);
void write_diagonal_csv(const std::string& path, const RVector& probs);

}  // namespace mgv
