#include "mgverify/postproc.hpp"

#include "mgverify/majorana.hpp"

namespace mgv {

RMatrix input_energy_coefficients(int n) {
  RMatrix h = RMatrix::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    h(2 * k, 2 * k + 1) = 0.5;
    h(2 * k + 1, 2 * k) = -0.5;
  }
  return h;
}

EnergyMap energy_coefficients(const Circuit& c) {
  if (c.meta().contains("skeleton")) return energy_coefficients(circuit_from_json(c.meta().at("skeleton")));
  const int n = c.width();
  if (n < 1) throw ValidationError("energy map needs at least one qubit");
  // h_out = R^T h_in R with R = R_1 R_2 ... R_s; accumulated as h <- R_k^T h R_k.
  RMatrix h = input_energy_coefficients(n);
  for (const auto& op : c.ops()) {
    if (op.is<MatchgateOp>()) {
      const auto& g = op.as<MatchgateOp>().gate;
      const Eigen::Matrix4d r = matchgate_orthogonal_block(g.matrix());
      const int m = 2 * g.first();
      const RMatrix rows = r.transpose() * h.middleRows(m, 4);
      h.middleRows(m, 4) = rows;
      const RMatrix cols = h.middleCols(m, 4) * r;
      h.middleCols(m, 4) = cols;
    } else if (op.is<PauliOp>()) {
      const auto s = pauli_conjugation_signs(op.as<PauliOp>().word);
      for (int i = 0; i < 2 * n; ++i)
        for (int j = 0; j < 2 * n; ++j) h(i, j) *= s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(j)];
    } else {
      throw ValidationError("energy map requires a matchgate-only circuit");
    }
  }
  EnergyMap em{n, h, {}};
  for (int k = 0; k < n; ++k) em.w.push_back(-2.0 * h(2 * k, 2 * k + 1));
  return em;
}

double energy_map(const Bitstring& x, const EnergyMap& em) {
  if (static_cast<int>(x.size()) != em.n) throw ValidationError("bitstring length does not match energy map");
  double f = 0.0;
  for (int k = 0; k < em.n; ++k) f += x[static_cast<std::size_t>(k)] ? -em.w[static_cast<std::size_t>(k)] : em.w[static_cast<std::size_t>(k)];
  return f;
}

SampleSet postprocess_samples(const std::vector<Bitstring>& xs, const EnergyMap& em) {
  SampleSet out{{}, Provenance::Postprocessed};
  out.values.reserve(xs.size());
  for (const auto& x : xs) out.values.push_back(energy_map(x, em));
  return out;
}

CMatrix energy_operator_dense(const EnergyMap& em) {
  const int n = em.n;
  std::vector<CMatrix> c;
  for (int i = 0; i < 2 * n; ++i) c.push_back(majorana_dense(i, n));
  const auto d = Eigen::Index{1} << n;
  CMatrix h = CMatrix::Zero(d, d);
  for (int i = 0; i < 2 * n; ++i)
    for (int j = 0; j < 2 * n; ++j)
      if (em.h(i, j) != 0.0) h += cplx(0, em.h(i, j)) * c[static_cast<std::size_t>(i)] * c[static_cast<std::size_t>(j)];
  return h;
}

}  // namespace mgv
