#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgverify/matchgate.hpp"
#include "mgverify/pauli.hpp"

namespace mgv {

struct SingleQubitOp {
  int qubit = 0;
  Mat2 u = Mat2::Identity();
};

struct MatchgateOp {
  Matchgate gate;
  /// Generator annotation consumed by the overrotation model; the matrix
  /// remains authoritative.
  std::optional<GateGenerator> generator;
};

struct CzOp {
  int q1 = 0;
  int q2 = 0;
};

struct PauliOp {
  PauliString word;
};

struct MeasureOp {
  int qubit = 0;
  std::string label;
};

/// Pauli applied according to the outcomes of earlier measurements. Table
/// keys are outcome strings ordered like `labels` (e.g. "0110").
struct CorrectionOp {
  int gadget = 0;
  std::vector<std::string> labels;
  std::map<std::string, PauliString> table;

  const PauliString& lookup(const std::map<std::string, int>& outcomes) const;
};

using OpVariant = std::variant<SingleQubitOp, MatchgateOp, CzOp, PauliOp, MeasureOp, CorrectionOp>;

struct CircuitOp {
  OpVariant op;
  /// Resource-state preparation; never carries a noise binding.
  bool prep = false;
  /// Circuit layer, used by layer-dependent noise schedules.
  std::optional<int> layer;

  template <class T>
  bool is() const { return std::holds_alternative<T>(op); }
  template <class T>
  const T& as() const { return std::get<T>(op); }
  /// Qubits touched by the op (for corrections: the table's word support).
  std::vector<int> qubits() const;
};

class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(int width, std::string name = {});

  int width() const { return width_; }
  /// Leading qubits that carry the computation; trailing qubits are ancillas.
  int data_width() const { return data_width_; }
  void set_data_width(int w);

  const std::vector<CircuitOp>& ops() const { return ops_; }
  std::size_t size() const { return ops_.size(); }
  const CircuitOp& operator[](std::size_t i) const { return ops_[i]; }

  nlohmann::json& meta() { return meta_; }
  const nlohmann::json& meta() const { return meta_; }

  Circuit& append(CircuitOp op);
  Circuit& add_single(int q, const Mat2& u, std::optional<int> layer = {});
  Circuit& add_matchgate(const Matchgate& g, std::optional<GateGenerator> gen = {}, std::optional<int> layer = {});
  Circuit& add_cz(int q1, int q2, std::optional<int> layer = {});
  Circuit& add_pauli(const PauliString& p);
  Circuit& add_measure(int q, std::string label);
  Circuit& add_correction(CorrectionOp c);

  /// Gate count s, resourceful (CZ) count r, and layer depth L.
  std::size_t gate_count() const;
  std::size_t cz_count() const;
  int depth() const;

  /// Checks index ranges, adjacency, label ordering and table totality.
  void validate() const;

  /// Circuit repeated `times` times; layers are offset per repetition.
  Circuit concatenated(int times) const;

  bool operator==(const Circuit& other) const;

 private:
  int width_ = 0;
  int data_width_ = 0;
  std::vector<CircuitOp> ops_;
  nlohmann::json meta_ = nlohmann::json::object();
};

// JSON interchange. Complex numbers are [re, im]; qubits are 0-based.
nlohmann::json to_json(const Circuit& c);
Circuit circuit_from_json(const nlohmann::json& j);
Circuit load_circuit(const std::string& path);
void save_circuit(const Circuit& c, const std::string& path);

}  // namespace mgv
