#include "mgverify/encoding.hpp"

#include <algorithm>
#include <cmath>

#include "mgverify/dense.hpp"

namespace mgv {

namespace {

const char* kOutcomeLetters = "abcd";

void append_fswap(Circuit& c, int q, std::optional<int> layer) { c.add_matchgate(fswap(q), fswap_generator(), layer); }

void append_logical_swap(Circuit& c, int a, std::optional<int> layer) {
  for (int q : {2 * a + 1, 2 * a, 2 * a + 2, 2 * a + 1}) append_fswap(c, q, layer);
}

std::string outcome_key(int v) {
  std::string s(4, '0');
  for (int b = 0; b < 4; ++b)
    if ((v >> (3 - b)) & 1) s[static_cast<std::size_t>(b)] = '1';
  return s;
}

// Ideal gadget on 8 lines [r1, r2, d1, M1, M2, M3, M4, d2]: r1/r2 hold the
// reference halves of Bell pairs with d1/d2. Returns the post-measurement
// state for the given outcome, or nullopt if the outcome has zero weight.
std::optional<StateVector> gadget_branch(MagicKind kind, int outcome) {
  StateVector s(8);
  const Mat2 h = hadamard();
  const Matchgate ghh = Matchgate::from_pair(h, h, 0);
  // Bell pairs (r1, d1) and (r2, d2) via H + CNOT.
  CMatrix cnot = CMatrix::Zero(4, 4);
  cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1;
  const int r1d1[2] = {0, 2}, r2d2[2] = {1, 7};
  const int r1[1] = {0}, r2[1] = {1};
  s.apply_matrix(h, r1);
  s.apply_matrix(cnot, r1d1);
  s.apply_matrix(h, r2);
  s.apply_matrix(cnot, r2d2);
  for (const auto& op : magic_prep_ops(kind, 3)) s.apply_gate(op);
  const int p1[2] = {2, 3}, p2[2] = {6, 7};
  s.apply_matrix(ghh.matrix(), p1);
  s.apply_matrix(ghh.matrix(), p2);
  const int measured[4] = {2, 3, 6, 7};
  for (int b = 0; b < 4; ++b) {
    const int a = (outcome >> (3 - b)) & 1;
    const double p1v = s.prob1(measured[b]);
    if ((a ? p1v : 1.0 - p1v) < 1e-12) return std::nullopt;
    s.project(measured[b], a);
  }
  return s;
}

// Target: gate applied to the Bell halves, outputs on (M2, M3).
StateVector gadget_target(MagicKind kind) {
  StateVector t(8);
  const Mat2 h = hadamard();
  CMatrix cnot = CMatrix::Zero(4, 4);
  cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1;
  const int r1[1] = {0}, r2[1] = {1};
  const int r1m2[2] = {0, 4}, r2m3[2] = {1, 5}, m23[2] = {4, 5};
  t.apply_matrix(h, r1);
  t.apply_matrix(cnot, r1m2);
  t.apply_matrix(h, r2);
  t.apply_matrix(cnot, r2m3);
  t.apply_matrix(kind == MagicKind::M ? cz_matrix() : fswap_matrix(), m23);
  return t;
}

}  // namespace

MagicKind magic_kind_from_string(const std::string& s) {
  if (s == "M" || s == "m" || s == "gadget-m") return MagicKind::M;
  if (s == "M'" || s == "Mprime" || s == "mprime" || s == "gadget-mprime") return MagicKind::MPrime;
  throw ValidationError("unknown magic state kind '" + s + "'");
}

std::string to_string(MagicKind k) { return k == MagicKind::M ? "M" : "Mprime"; }

EncodedCircuit encode_universal(const Circuit& base) {
  base.validate();
  const int m = base.width();
  Circuit enc(2 * m);
  enc.meta() = base.meta();
  enc.meta()["encoded_from"] = m;
  for (const auto& op : base.ops()) {
    if (op.is<SingleQubitOp>()) {
      const auto& u = op.as<SingleQubitOp>();
      const Matchgate g = Matchgate::from_pair(u.u, u.u, 2 * u.qubit);
      enc.add_matchgate(g, g.generator(), op.layer);
    } else if (op.is<CzOp>()) {
      auto [a, b] = op.as<CzOp>();
      if (a > b) std::swap(a, b);
      // Bubble a up to b - 1, apply the adjacent CZ, bubble back.
      for (int q = a; q < b - 1; ++q) append_logical_swap(enc, q, op.layer);
      enc.add_cz(2 * (b - 1) + 1, 2 * b, op.layer);
      for (int q = b - 2; q >= a; --q) append_logical_swap(enc, q, op.layer);
    } else {
      throw ValidationError("encode_universal accepts only single-qubit gates and CZ");
    }
  }
  enc.validate();
  return {base, std::move(enc)};
}

Circuit replace_cz_with_fswap(const Circuit& c) {
  Circuit out(c.width());
  out.meta() = c.meta();
  out.set_data_width(c.data_width());
  for (const auto& op : c.ops()) {
    if (!op.is<CzOp>()) {
      out.append(op);
      continue;
    }
    const auto [a, b] = op.as<CzOp>();
    if (std::abs(a - b) != 1) throw ValidationError("replace_cz_with_fswap: CZ on non-adjacent qubits");
    CircuitOp r{MatchgateOp{fswap(std::min(a, b)), fswap_generator()}, op.prep, op.layer};
    out.append(std::move(r));
  }
  return out;
}

CVector magic_state(MagicKind kind) {
  StateVector s(4);
  for (const auto& op : magic_prep_ops(kind, 0)) s.apply_gate(op);
  return s.amplitudes();
}

std::vector<CircuitOp> magic_prep_ops(MagicKind kind, int r) {
  const Mat2 h = hadamard();
  std::vector<CircuitOp> ops;
  ops.push_back({MatchgateOp{Matchgate::from_pair(h, h, r), std::nullopt}, true, {}});
  ops.push_back({MatchgateOp{Matchgate::from_pair(h, h, r + 2), std::nullopt}, true, {}});
  if (kind == MagicKind::M) {
    ops.push_back({CzOp{r + 1, r + 2}, true, {}});
  } else {
    ops.push_back({MatchgateOp{fswap(r + 1), fswap_generator()}, true, {}});
  }
  return ops;
}

CorrectionTable derive_gadget_corrections(MagicKind kind) {
  const StateVector target = gadget_target(kind);
  const auto words = all_paulis(2);
  const int m23[2] = {4, 5};
  CorrectionTable table;
  for (int o = 0; o < 16; ++o) {
    auto branch = gadget_branch(kind, o);
    if (!branch) throw SimulationError("gadget outcome " + outcome_key(o) + " has zero probability");
    // Flip the measured lines back to |0> so the comparison sees one layout.
    PauliString reset(8);
    const int measured[4] = {2, 3, 6, 7};
    for (int b = 0; b < 4; ++b)
      if ((o >> (3 - b)) & 1) reset.set(static_cast<std::size_t>(measured[b]), Pauli::X);
    branch->apply_pauli(reset);
    bool found = false;
    for (const auto& w : words) {
      StateVector trial = *branch;
      trial.apply_pauli(w.embedded(8, m23));
      const double fid = std::norm(target.amplitudes().dot(trial.amplitudes()));
      if (fid >= 1.0 - 1e-10) {
        table.emplace(outcome_key(o), w);
        found = true;
        break;
      }
    }
    if (!found) throw SimulationError("no Pauli correction found for gadget outcome " + outcome_key(o));
  }
  return table;
}

GadgetizedCircuit gadgetize(const Circuit& encoded, MagicKind kind, int max_registers) {
  encoded.validate();
  const int n = encoded.width();
  const int r = static_cast<int>(encoded.cz_count());
  if (r > max_registers) throw ValidationError("register budget exhausted: " + std::to_string(r) + " gadgets requested");
  for (const auto& op : encoded.ops())
    if (op.is<MeasureOp>() || op.is<CorrectionOp>()) throw ValidationError("gadgetize expects a circuit without measurements");
  GadgetizedCircuit out{Circuit(n + 4 * r), {}};
  Circuit& c = out.circuit;
  c.meta() = encoded.meta();
  c.meta()["magic"] = to_string(kind);
  c.set_data_width(n);
  if (r == 0) {
    for (const auto& op : encoded.ops()) c.append(op);
    return out;
  }
  const CorrectionTable table = derive_gadget_corrections(kind);
  for (int g = 0; g < r; ++g)
    for (auto op : magic_prep_ops(kind, n + 4 * g)) c.append(std::move(op));

  auto move_line = [&](int from, int to, std::optional<int> layer) {
    if (from > to)
      for (int q = from - 1; q >= to; --q) append_fswap(c, q, layer);
    else
      for (int q = from; q < to; ++q) append_fswap(c, q, layer);
  };

  int g = 0;
  const Mat2 h = hadamard();
  for (const auto& op : encoded.ops()) {
    if (!op.is<CzOp>()) {
      c.append(op);
      continue;
    }
    auto [a, b] = op.as<CzOp>();
    if (a > b) std::swap(a, b);
    if (b != a + 1) throw ValidationError("gadgetize expects nearest-neighbour CZ");
    const int k = a;
    const int reg = n + 4 * g;
    // Magic lines M1..M4 travel in between d1 = k and d2 = k + 1.
    for (int j = 0; j < 4; ++j) move_line(reg + j, k + 1 + j, op.layer);
    c.add_matchgate(Matchgate::from_pair(h, h, k), std::nullopt, op.layer);
    c.add_matchgate(Matchgate::from_pair(h, h, k + 4), std::nullopt, op.layer);
    GadgetLayout lay;
    lay.gadget = g;
    lay.data_pair = k;
    lay.register_qubits = {reg, reg + 1, reg + 2, reg + 3};
    lay.measured = {k, k + 1, k + 4, k + 5};
    for (int j = 0; j < 4; ++j) {
      lay.labels.push_back("g" + std::to_string(g) + kOutcomeLetters[j]);
      c.add_measure(lay.measured[static_cast<std::size_t>(j)], lay.labels.back());
    }
    CorrectionOp corr;
    corr.gadget = g;
    corr.labels = lay.labels;
    const int m23[2] = {k + 2, k + 3};
    for (const auto& [key, word] : table) {
      PauliString w = word.embedded(static_cast<std::size_t>(c.width()), m23);
      for (int j = 0; j < 4; ++j)
        if (key[static_cast<std::size_t>(j)] == '1') w.set(static_cast<std::size_t>(lay.measured[static_cast<std::size_t>(j)]), Pauli::X);
      corr.table.emplace(key, std::move(w));
    }
    c.add_correction(std::move(corr));
    lay.table = table;
    // Retire the four |0> lines to the register home, outermost first.
    move_line(k + 5, reg + 3, op.layer);
    move_line(k + 4, reg + 2, op.layer);
    move_line(k + 1, reg + 1, op.layer);
    move_line(k, reg, op.layer);
    out.layouts.push_back(std::move(lay));
    ++g;
  }
  if (kind == MagicKind::MPrime) c.meta()["skeleton"] = to_json(replace_cz_with_fswap(encoded));
  c.validate();
  return out;
}

}  // namespace mgv
