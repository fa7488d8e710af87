#pragma once

#include <vector>

#include "mgverify/circuit.hpp"
#include "mgverify/dense.hpp"
#include "mgverify/stats.hpp"

namespace mgv {

/// H_out = i sum_ij h_ij c_i c_j for H_in = -sum_k Z_k evolved by a matchgate circuit.
struct EnergyMap {
  int n = 0;
  RMatrix h;
  /// f(x) = sum_k w[k] (-1)^{x_k}
  std::vector<double> w;
};

/// h_in: the 2x2 blocks [[0, 1/2], [-1/2, 0]].
RMatrix input_energy_coefficients(int n);

/// For gadgetized circuits the stored matchgate skeleton is used.
EnergyMap energy_coefficients(const Circuit& c);

double energy_map(const Bitstring& x, const EnergyMap& em);

SampleSet postprocess_samples(const std::vector<Bitstring>& xs, const EnergyMap& em);

/// Dense H_out for oracle checks (n small).
CMatrix energy_operator_dense(const EnergyMap& em);

}  // namespace mgv
