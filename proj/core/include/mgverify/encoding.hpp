#pragma once

#include <map>
#include <string>
#include <vector>

#include "mgverify/circuit.hpp"

namespace mgv {

/// Base circuit on m qubits and its encoding on n = 2m qubits; logical
/// qubit i occupies lines (2i, 2i+1).
struct EncodedCircuit {
  Circuit base;
  Circuit encoded;
};

/// Single-qubit A on i -> G(A, A) on (2i, 2i+1); CZ(i, i+1) -> CZ(2i+1, 2i+2);
/// distant CZs are routed with logical SWAPs, each realized by four fSWAPs.
EncodedCircuit encode_universal(const Circuit& base);

/// Every nearest-neighbour CZ becomes an fSWAP on the same pair.
Circuit replace_cz_with_fswap(const Circuit& c);

enum class MagicKind { M, MPrime };
MagicKind magic_kind_from_string(const std::string& s);
std::string to_string(MagicKind k);

/// 16 amplitudes, qubit 0 most significant.
CVector magic_state(MagicKind kind);

/// Ops preparing the magic state on (r, r+1, r+2, r+3) from |0000>, marked prep.
std::vector<CircuitOp> magic_prep_ops(MagicKind kind, int r);

/// Outcome string "abcd" -> two-letter word on the surviving magic lines
/// (M2, M3). Derived by exhaustive search against the dense oracle.
using CorrectionTable = std::map<std::string, PauliString>;
CorrectionTable derive_gadget_corrections(MagicKind kind);

struct GadgetLayout {
  int gadget = 0;
  int data_pair = 0;             ///< first line of the CZ pair it replaces
  std::vector<int> register_qubits;  ///< home positions, retired here afterwards
  std::vector<int> measured;     ///< lines carrying outcomes a, b, c, d
  std::vector<std::string> labels;
  CorrectionTable table;
};

struct GadgetizedCircuit {
  Circuit circuit;
  std::vector<GadgetLayout> layouts;
};

/// Replaces every CZ of an encoded circuit by a teleportation gadget
/// consuming one magic register appended after the data lines. The
/// noiseless action equals the encoded circuit (M) or its fSWAP variant (M').
GadgetizedCircuit gadgetize(const Circuit& encoded, MagicKind kind, int max_registers = 8);

}  // namespace mgv
