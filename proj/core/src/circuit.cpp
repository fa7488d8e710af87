#include "mgverify/circuit.hpp"

#include <algorithm>
#include <set>

namespace mgv {

namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

std::string outcome_key(std::size_t bits, std::size_t value) {
  std::string s(bits, '0');
  for (std::size_t i = 0; i < bits; ++i)
    if ((value >> (bits - 1 - i)) & 1u) s[i] = '1';
  return s;
}

}  // namespace

const PauliString& CorrectionOp::lookup(const std::map<std::string, int>& outcomes) const {
  std::string key;
  key.reserve(labels.size());
  for (const auto& l : labels) {
    auto it = outcomes.find(l);
    if (it == outcomes.end()) throw ValidationError("correction references unknown outcome label '" + l + "'");
    key.push_back(it->second ? '1' : '0');
  }
  auto it = table.find(key);
  if (it == table.end()) throw ValidationError("correction table has no entry for outcome " + key);
  return it->second;
}

std::vector<int> CircuitOp::qubits() const {
  return std::visit(
      overloaded{
          [](const SingleQubitOp& o) { return std::vector<int>{o.qubit}; },
          [](const MatchgateOp& o) { return std::vector<int>{o.gate.first(), o.gate.second()}; },
          [](const CzOp& o) { return std::vector<int>{o.q1, o.q2}; },
          [](const PauliOp& o) {
            std::vector<int> q;
            for (auto s : o.word.support()) q.push_back(static_cast<int>(s));
            return q;
          },
          [](const MeasureOp& o) { return std::vector<int>{o.qubit}; },
          [](const CorrectionOp& o) {
            std::set<int> q;
            for (const auto& [k, w] : o.table)
              for (auto s : w.support()) q.insert(static_cast<int>(s));
            return std::vector<int>(q.begin(), q.end());
          },
      },
      op);
}

Circuit::Circuit(int width, std::string name) : width_(width), data_width_(width) {
  if (width < 0) throw ValidationError("circuit width must be non-negative");
  if (!name.empty()) meta_["name"] = std::move(name);
}

void Circuit::set_data_width(int w) {
  if (w < 0 || w > width_) throw ValidationError("data width out of range");
  data_width_ = w;
}

Circuit& Circuit::append(CircuitOp op) {
  ops_.push_back(std::move(op));
  return *this;
}

Circuit& Circuit::add_single(int q, const Mat2& u, std::optional<int> layer) {
  return append({SingleQubitOp{q, u}, false, layer});
}

Circuit& Circuit::add_matchgate(const Matchgate& g, std::optional<GateGenerator> gen, std::optional<int> layer) {
  return append({MatchgateOp{g, gen}, false, layer});
}

Circuit& Circuit::add_cz(int q1, int q2, std::optional<int> layer) { return append({CzOp{q1, q2}, false, layer}); }

Circuit& Circuit::add_pauli(const PauliString& p) { return append({PauliOp{p}, false, {}}); }

Circuit& Circuit::add_measure(int q, std::string label) { return append({MeasureOp{q, std::move(label)}, false, {}}); }

Circuit& Circuit::add_correction(CorrectionOp c) { return append({std::move(c), false, {}}); }

std::size_t Circuit::gate_count() const {
  return std::count_if(ops_.begin(), ops_.end(), [](const CircuitOp& o) {
    return !o.prep && (o.is<SingleQubitOp>() || o.is<MatchgateOp>() || o.is<CzOp>());
  });
}

std::size_t Circuit::cz_count() const {
  return std::count_if(ops_.begin(), ops_.end(), [](const CircuitOp& o) { return o.is<CzOp>(); });
}

int Circuit::depth() const {
  int layers = 0;
  bool any = false;
  for (const auto& o : ops_)
    if (o.layer) {
      layers = std::max(layers, *o.layer + 1);
      any = true;
    }
  if (any) return layers;
  // Greedy ASAP layering over qubit occupancy.
  std::vector<int> front(width_, 0);
  int depth = 0;
  for (const auto& o : ops_) {
    if (!(o.is<SingleQubitOp>() || o.is<MatchgateOp>() || o.is<CzOp>())) continue;
    int start = 0;
    for (int q : o.qubits()) start = std::max(start, front[q]);
    for (int q : o.qubits()) front[q] = start + 1;
    depth = std::max(depth, start + 1);
  }
  return depth;
}

void Circuit::validate() const {
  auto check_q = [&](int q) {
    if (q < 0 || q >= width_) throw ValidationError("qubit index " + std::to_string(q) + " out of range");
  };
  std::set<std::string> seen_labels;
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    std::visit(
        overloaded{
            [&](const SingleQubitOp& o) {
              check_q(o.qubit);
              if (!is_unitary(o.u)) throw ValidationError("single-qubit gate is not unitary");
            },
            [&](const MatchgateOp& o) {
              check_q(o.gate.first());
              check_q(o.gate.second());
            },
            [&](const CzOp& o) {
              check_q(o.q1);
              check_q(o.q2);
              if (o.q1 == o.q2) throw ValidationError("CZ on a single qubit");
            },
            [&](const PauliOp& o) {
              if (static_cast<int>(o.word.size()) != width_) throw ValidationError("Pauli word length != width");
            },
            [&](const MeasureOp& o) {
              check_q(o.qubit);
              if (o.label.empty()) throw ValidationError("measurement without label");
              if (!seen_labels.insert(o.label).second) throw ValidationError("duplicate label " + o.label);
            },
            [&](const CorrectionOp& o) {
              for (const auto& l : o.labels)
                if (!seen_labels.count(l))
                  throw ValidationError("correction references label '" + l + "' before it is measured");
              const std::size_t k = o.labels.size();
              if (k > 20) throw ValidationError("correction table too large");
              for (std::size_t v = 0; v < (std::size_t{1} << k); ++v) {
                auto it = o.table.find(outcome_key(k, v));
                if (it == o.table.end()) throw ValidationError("correction table is not total");
                if (static_cast<int>(it->second.size()) != width_)
                  throw ValidationError("correction word length != width");
              }
            },
        },
        ops_[i].op);
  }
}

Circuit Circuit::concatenated(int times) const {
  if (times < 1) throw ValidationError("concatenation factor must be >= 1");
  Circuit out = *this;
  out.ops_.clear();
  const int L = depth();
  for (int t = 0; t < times; ++t)
    for (auto op : ops_) {
      if (op.prep && t > 0) continue;
      if (op.layer) *op.layer += t * L;
      if (t > 0 && op.is<MeasureOp>()) {
        auto& m = std::get<MeasureOp>(op.op);
        m.label += "#" + std::to_string(t);
      }
      if (t > 0 && op.is<CorrectionOp>()) {
        auto& c = std::get<CorrectionOp>(op.op);
        for (auto& l : c.labels) l += "#" + std::to_string(t);
      }
      out.ops_.push_back(std::move(op));
    }
  if (times > 1) out.meta_["concat"] = times;
  return out;
}

bool Circuit::operator==(const Circuit& other) const { return to_json(*this) == to_json(other); }

}  // namespace mgv
