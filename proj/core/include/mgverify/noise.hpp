#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgverify/circuit.hpp"
#include "mgverify/pauli.hpp"
#include "mgverify/rng.hpp"

namespace mgv {

inline constexpr int kDefaultLocality = 4;

/// Stochastic Pauli channel sum_P c(P) P(.)P on k qubits (local words).
class PauliChannel {
 public:
  PauliChannel() = default;
  /// Identity channel on k qubits.
  explicit PauliChannel(int k);
  /// Zero entries are dropped. Throws ValidationError on negative
  /// coefficients or a sum away from 1 (unless renormalize is set).
  PauliChannel(int k, std::map<PauliString, double> entries, bool renormalize = false);

  int size() const { return k_; }
  const std::map<PauliString, double>& entries() const { return entries_; }
  double coefficient(const PauliString& p) const;

  /// Convolution under the phase-free Pauli product (channel composition).
  PauliChannel compose(const PauliChannel& other) const;
  /// Lift onto `positions` of a wider k'-qubit register.
  PauliChannel embedded(int k, std::span<const int> positions) const;
  /// Probability that qubit q suffers a bit flip (X or Y letter).
  double flip_probability(int q) const;
  bool is_identity() const;

  nlohmann::json to_json() const;
  static PauliChannel from_json(const nlohmann::json& j);

 private:
  int k_ = 0;
  std::map<PauliString, double> entries_;
};

/// A Pauli channel attached to concrete circuit qubits, with a sampling table.
class BoundPauliChannel {
 public:
  BoundPauliChannel() = default;
  BoundPauliChannel(std::vector<int> qubits, PauliChannel channel);

  const std::vector<int>& qubits() const { return qubits_; }
  const PauliChannel& channel() const { return channel_; }

  /// Local word drawn from c(.); index into words().
  std::size_t sample_index(Rng& rng) const;
  const std::vector<PauliString>& words() const { return words_; }
  const std::vector<double>& probabilities() const { return probs_; }
  /// Index of the identity word, or words().size() if absent.
  std::size_t identity_index() const { return identity_; }

  /// Full-width word for a local sample.
  PauliString global_word(std::size_t index, int width) const;

 private:
  std::vector<int> qubits_;
  PauliChannel channel_;
  std::vector<PauliString> words_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
  std::size_t identity_ = 0;
};

/// Composition of two bound channels on the union of their qubits.
BoundPauliChannel compose(const BoundPauliChannel& a, const BoundPauliChannel& b);

/// CPTP map on a few qubits given by Kraus operators (qubit targets[0] is the
/// most significant tensor factor).
struct LocalChannel {
  std::vector<int> targets;
  std::vector<CMatrix> kraus;

  static LocalChannel identity(std::vector<int> targets);
  static LocalChannel unitary(const CMatrix& u, std::vector<int> targets);
  static LocalChannel from_pauli(const BoundPauliChannel& c);

  bool is_cptp(double tol = 1e-9) const;
  /// this after `first` (both on the same targets).
  LocalChannel after(const LocalChannel& first) const;
  /// Pauli transfer matrix R_PQ = tr(P E(Q)) / 2^k, words ordered as all_paulis(k).
  RMatrix ptm() const;
};

BoundPauliChannel crosstalk_channel(int t, int b, double p_c);
/// Crosstalk of a gate on `targets`: C_{t,b} for each target t and each
/// neighbour b of t within [0, width). Neighbours outside are skipped.
BoundPauliChannel gate_crosstalk(std::span<const int> targets, int width, double p_c);

/// exp(i * gamma * sum_P |beta_P| P) on (first, first + 1).
LocalChannel overrotation_channel(const GateGenerator& g, double gamma, int first);

/// Diagonal of the channel in the Pauli basis (chi diagonal), clamped and normalized.
BoundPauliChannel pauli_twirl(const LocalChannel& e);

/// Twirl of delta after e, for noisy Pauli layers.
BoundPauliChannel compose_noisy_pauli(const LocalChannel& delta, const LocalChannel& e);

struct MeasurementError {
  BoundPauliChannel channel;
  double epsilon = 0.0;  ///< outcome flip probability
};
MeasurementError measurement_error_params(const LocalChannel& e, int qubit);

std::vector<double> drift_schedule(double gamma, double gamma_tilde, int layers);

/// Perturbed coefficients |c(P) + eps * N_P| / norm over the admissible words
/// (support inside the support of some Q with c(Q) != 0); N is a uniformly
/// random unit vector over the admissible words.
BoundPauliChannel perturb_pauli_channel(const BoundPauliChannel& c, double eps, Rng& rng);

struct ErrorModelConfig {
  double p_c = 5e-3;
  double gamma = 0.05;
  /// Drift endpoint; 1 means static overrotation.
  double gamma_tilde = 1.0;
  /// Radius of the per-gate perturbation; 0 disables it.
  double epsilon = 0.0;
  /// Bit-flip probability before every measurement (intermediate and final).
  double readout_flip = 0.0;
  int locality = kDefaultLocality;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static ErrorModelConfig from_json(const nlohmann::json& j);
};

/// Twirled channels per op (gates and intermediate measurements) and per
/// final readout qubit. Prep ops, Paulis and corrections are noiseless.
struct NoiseBindings {
  std::vector<std::optional<BoundPauliChannel>> per_op;
  std::vector<std::optional<BoundPauliChannel>> readout;

  static NoiseBindings noiseless(const Circuit& c);
  bool empty() const;
};

/// Layer index of every op (annotated layer, else ASAP layering).
std::vector<int> op_layers(const Circuit& c);

NoiseBindings build_bindings(const Circuit& c, const ErrorModelConfig& cfg);

}  // namespace mgv
