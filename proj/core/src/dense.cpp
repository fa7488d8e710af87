#include "mgverify/dense.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "mgverify/majorana.hpp"

namespace mgv {

namespace {

constexpr double kZeroProbability = 1e-12;
constexpr char kStateMagic[8] = {'M', 'G', 'V', 'S', 'T', 'A', 'T', 'E'};

void check_width(int n) {
  if (n < 0 || n > kMaxDenseQubits)
    throw ValidationError("dense engine supports 0.." + std::to_string(kMaxDenseQubits) + " qubits, got " + std::to_string(n));
}

inline int parity(std::uint64_t v) { return std::popcount(v) & 1; }

std::uint64_t bit_of(int n, int q) { return std::uint64_t{1} << (n - 1 - q); }

void check_qubits(int n, std::span<const int> qubits) {
  for (int q : qubits)
    if (q < 0 || q >= n) throw ValidationError("qubit index " + std::to_string(q) + " out of range");
}

CMatrix gate_matrix(const CircuitOp& op, std::vector<int>& qubits) {
  qubits = op.qubits();
  if (op.is<SingleQubitOp>()) return op.as<SingleQubitOp>().u;
  if (op.is<MatchgateOp>()) return op.as<MatchgateOp>().gate.matrix();
  if (op.is<CzOp>()) {
    const auto& cz = op.as<CzOp>();
    qubits = {cz.q1, cz.q2};
    return cz_matrix();
  }
  throw ValidationError("op is not a gate");
}

}  // namespace

std::string to_string(const Bitstring& b) {
  std::string s(b.size(), '0');
  for (std::size_t i = 0; i < b.size(); ++i) s[i] = b[i] ? '1' : '0';
  return s;
}

Bitstring parse_bitstring(std::string_view s) {
  Bitstring b(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1') throw ValidationError("bitstring may only contain 0 and 1");
    b[i] = s[i] == '1';
  }
  return b;
}

std::uint64_t bits_index(const Bitstring& b) {
  if (b.size() > 64) throw ValidationError("bitstring too long for an index");
  std::uint64_t v = 0;
  for (auto x : b) v = (v << 1) | (x ? 1u : 0u);
  return v;
}

Bitstring index_bits(std::uint64_t index, int n) {
  Bitstring b(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q) b[static_cast<std::size_t>(q)] = (index >> (n - 1 - q)) & 1u;
  return b;
}

void apply_local(cplx* data, int nbits, std::span<const int> qubits, const CMatrix& m) {
  const int k = static_cast<int>(qubits.size());
  if (k < 1 || k > 4) throw ValidationError("apply_local supports 1..4 qubits");
  const int dim = 1 << k;
  if (m.rows() != dim || m.cols() != dim) throw ValidationError("matrix size does not match target count");
  std::array<std::uint64_t, 16> offset{};
  std::uint64_t mask = 0;
  for (int b = 0; b < k; ++b) {
    const std::uint64_t bit = std::uint64_t{1} << (nbits - 1 - qubits[static_cast<std::size_t>(b)]);
    if (mask & bit) throw ValidationError("repeated target qubit");
    mask |= bit;
    for (int l = 0; l < dim; ++l)
      if ((l >> (k - 1 - b)) & 1) offset[static_cast<std::size_t>(l)] |= bit;
  }
  const std::uint64_t total = std::uint64_t{1} << nbits;
  std::array<cplx, 16> v{};
  std::array<cplx, 16> w{};
  for (std::uint64_t base = 0; base < total; base = ((base | mask) + 1) & ~mask) {
    for (int l = 0; l < dim; ++l) v[static_cast<std::size_t>(l)] = data[base + offset[static_cast<std::size_t>(l)]];
    for (int r = 0; r < dim; ++r) {
      cplx acc = 0;
      for (int c = 0; c < dim; ++c) acc += m(r, c) * v[static_cast<std::size_t>(c)];
      w[static_cast<std::size_t>(r)] = acc;
    }
    for (int l = 0; l < dim; ++l) data[base + offset[static_cast<std::size_t>(l)]] = w[static_cast<std::size_t>(l)];
    if (((base | mask) + 1) == 0) break;
  }
}

// ---------------------------------------------------------------- StateVector

StateVector::StateVector(int n) : n_(n) {
  check_width(n);
  amp_ = CVector::Zero(Eigen::Index{1} << n);
  amp_(0) = 1.0;
}

StateVector StateVector::from_amplitudes(CVector amp) {
  const auto d = amp.size();
  if (d < 1 || (d & (d - 1)) != 0) throw ValidationError("amplitude vector length must be a power of two");
  StateVector s(std::countr_zero(static_cast<std::uint64_t>(d)));
  if (std::abs(amp.norm() - 1.0) > 1e-10) throw ValidationError("statevector is not normalized");
  s.amp_ = std::move(amp);
  return s;
}

void StateVector::apply_matrix(const CMatrix& m, std::span<const int> qubits) {
  check_qubits(n_, qubits);
  apply_local(amp_.data(), n_, qubits, m);
}

void StateVector::apply_pauli(const PauliString& p) {
  if (static_cast<int>(p.size()) != n_) throw ValidationError("Pauli word length does not match state");
  const auto x = p.x_mask();
  const auto z = p.z_mask();
  int ny = 0;
  for (std::size_t q = 0; q < p.size(); ++q) ny += p[q] == Pauli::Y;
  static const cplx ipow[4] = {1.0, cplx(0, 1), -1.0, cplx(0, -1)};
  const cplx ph = ipow[ny & 3];
  CVector out(amp_.size());
  for (Eigen::Index b = 0; b < amp_.size(); ++b) {
    const auto ub = static_cast<std::uint64_t>(b);
    out(static_cast<Eigen::Index>(ub ^ x)) = (parity(ub & z) ? -ph : ph) * amp_(b);
  }
  amp_.swap(out);
}

void StateVector::apply_gate(const CircuitOp& op) {
  if (op.is<PauliOp>()) return apply_pauli(op.as<PauliOp>().word);
  std::vector<int> qs;
  const CMatrix m = gate_matrix(op, qs);
  apply_matrix(m, qs);
}

double StateVector::prob1(int q) const {
  check_qubits(n_, std::span<const int>(&q, 1));
  const auto bit = bit_of(n_, q);
  double p = 0.0;
  for (Eigen::Index b = 0; b < amp_.size(); ++b)
    if (static_cast<std::uint64_t>(b) & bit) p += std::norm(amp_(b));
  return std::clamp(p, 0.0, 1.0);
}

double StateVector::project(int q, int outcome) {
  const double p1 = prob1(q);
  const double p = outcome ? p1 : 1.0 - p1;
  if (p < kZeroProbability) throw SimulationError("projection onto a zero-probability outcome");
  const auto bit = bit_of(n_, q);
  const double scale = 1.0 / std::sqrt(p);
  for (Eigen::Index b = 0; b < amp_.size(); ++b) {
    const bool one = (static_cast<std::uint64_t>(b) & bit) != 0;
    amp_(b) = (one == (outcome != 0)) ? amp_(b) * scale : cplx(0);
  }
  return p;
}

int StateVector::measure(int q, Rng& rng) {
  const double p1 = prob1(q);
  int a = uniform01(rng) < p1 ? 1 : 0;
  if ((a ? p1 : 1.0 - p1) < kZeroProbability) a ^= 1;
  project(q, a);
  return a;
}

RVector StateVector::probabilities() const { return amp_.cwiseAbs2(); }

// -------------------------------------------------------------- DensityMatrix

DensityMatrix::DensityMatrix(int n) : n_(n) {
  check_width(n);
  const auto d = Eigen::Index{1} << n;
  rho_ = CMatrix::Zero(d, d);
  rho_(0, 0) = 1.0;
}

DensityMatrix DensityMatrix::from_state(const StateVector& s) {
  DensityMatrix r(s.size());
  r.rho_ = s.amplitudes() * s.amplitudes().adjoint();
  return r;
}

DensityMatrix DensityMatrix::from_matrix(CMatrix rho) {
  const auto d = rho.rows();
  if (d != rho.cols() || d < 1 || (d & (d - 1)) != 0) throw ValidationError("density matrix must be square with power-of-two size");
  DensityMatrix r(std::countr_zero(static_cast<std::uint64_t>(d)));
  r.rho_ = std::move(rho);
  return r;
}

void DensityMatrix::apply_matrix(const CMatrix& m, std::span<const int> qubits) {
  check_qubits(n_, qubits);
  // Column-major storage: element (i, j) sits at j * D + i, i.e. a 2n-bit
  // index whose high half is j. Qubit q of the row index is combined qubit n + q.
  std::vector<int> rows, cols;
  for (int q : qubits) {
    rows.push_back(n_ + q);
    cols.push_back(q);
  }
  apply_local(rho_.data(), 2 * n_, rows, m);
  apply_local(rho_.data(), 2 * n_, cols, m.conjugate());
}

void DensityMatrix::apply_pauli(const PauliString& p) {
  if (static_cast<int>(p.size()) != n_) throw ValidationError("Pauli word length does not match state");
  const auto x = p.x_mask();
  const auto z = p.z_mask();
  const auto d = rho_.rows();
  CMatrix out(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto ui = static_cast<std::uint64_t>(i), uj = static_cast<std::uint64_t>(j);
      const double s = parity((ui ^ uj) & z) ? -1.0 : 1.0;
      out(static_cast<Eigen::Index>(ui ^ x), static_cast<Eigen::Index>(uj ^ x)) = s * rho_(i, j);
    }
  rho_.swap(out);
}

void DensityMatrix::apply_gate(const CircuitOp& op) {
  if (op.is<PauliOp>()) return apply_pauli(op.as<PauliOp>().word);
  std::vector<int> qs;
  const CMatrix m = gate_matrix(op, qs);
  apply_matrix(m, qs);
}

void DensityMatrix::apply_channel(const BoundPauliChannel& c) {
  const auto& qs = c.qubits();
  check_qubits(n_, qs);
  const int k = static_cast<int>(qs.size());
  if (c.channel().is_identity()) return;
  // rho'(i, j) = sum_x f_x(loc(i ^ j)) rho(i ^ x, j ^ x), f_x(d) = sum_z c(x, z) (-1)^{z.d}.
  const std::size_t ld = std::size_t{1} << k;
  std::map<std::uint64_t, std::vector<double>> f;
  for (const auto& [w, coeff] : c.channel().entries()) {
    const auto xl = w.x_mask();
    const auto zl = w.z_mask();
    auto& fx = f[xl];
    if (fx.empty()) fx.assign(ld, 0.0);
    for (std::size_t dl = 0; dl < ld; ++dl) fx[dl] += parity(zl & dl) ? -coeff : coeff;
  }
  const auto d = rho_.rows();
  std::vector<std::uint32_t> loc(static_cast<std::size_t>(d), 0);
  for (Eigen::Index i = 0; i < d; ++i)
    for (int b = 0; b < k; ++b)
      if (static_cast<std::uint64_t>(i) & bit_of(n_, qs[static_cast<std::size_t>(b)]))
        loc[static_cast<std::size_t>(i)] |= 1u << (k - 1 - b);
  auto global = [&](std::uint64_t local) {
    std::uint64_t g = 0;
    for (int b = 0; b < k; ++b)
      if ((local >> (k - 1 - b)) & 1u) g |= bit_of(n_, qs[static_cast<std::size_t>(b)]);
    return g;
  };
  CMatrix out = CMatrix::Zero(d, d);
  for (const auto& [xl, fx] : f) {
    const auto x = global(xl);
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto uj = static_cast<std::uint64_t>(j);
      const auto lj = loc[uj];
      const cplx* src = rho_.data() + static_cast<Eigen::Index>(uj ^ x) * d;
      cplx* dst = out.data() + j * d;
      for (Eigen::Index i = 0; i < d; ++i) {
        const auto ui = static_cast<std::uint64_t>(i);
        dst[i] += fx[loc[ui] ^ lj] * src[ui ^ x];
      }
    }
  }
  rho_.swap(out);
}

void DensityMatrix::apply_channel(const LocalChannel& c) {
  check_qubits(n_, c.targets);
  if (!c.is_cptp()) throw ValidationError("channel is not CPTP");
  CMatrix acc = CMatrix::Zero(rho_.rows(), rho_.cols());
  const CMatrix orig = rho_;
  for (const auto& k : c.kraus) {
    rho_ = orig;
    apply_matrix(k, c.targets);
    acc += rho_;
  }
  rho_.swap(acc);
}

double DensityMatrix::prob1(int q) const {
  check_qubits(n_, std::span<const int>(&q, 1));
  const auto bit = bit_of(n_, q);
  double p = 0.0;
  for (Eigen::Index i = 0; i < rho_.rows(); ++i)
    if (static_cast<std::uint64_t>(i) & bit) p += rho_(i, i).real();
  return std::clamp(p / trace(), 0.0, 1.0);
}

double DensityMatrix::project(int q, int outcome) {
  const double p1 = prob1(q);
  const double p = outcome ? p1 : 1.0 - p1;
  if (p < kZeroProbability) throw SimulationError("projection onto a zero-probability outcome");
  const auto bit = bit_of(n_, q);
  const auto d = rho_.rows();
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) {
      const bool keep = (((static_cast<std::uint64_t>(i) & bit) != 0) == (outcome != 0)) &&
                        (((static_cast<std::uint64_t>(j) & bit) != 0) == (outcome != 0));
      rho_(i, j) = keep ? rho_(i, j) / p : cplx(0);
    }
  return p;
}

void DensityMatrix::dephase(int q) {
  check_qubits(n_, std::span<const int>(&q, 1));
  const auto bit = bit_of(n_, q);
  const auto d = rho_.rows();
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i)
      if ((static_cast<std::uint64_t>(i ^ j) & bit) != 0) rho_(i, j) = 0;
}

void DensityMatrix::apply_correction(const CorrectionOp& c, std::span<const int> record) {
  check_qubits(n_, record);
  if (record.size() != c.labels.size()) throw ValidationError("record size does not match correction labels");
  std::uint64_t rmask = 0;
  for (int q : record) rmask |= bit_of(n_, q);
  const std::size_t k = record.size();
  auto key_of = [&](std::uint64_t i) {
    std::string key(k, '0');
    for (std::size_t b = 0; b < k; ++b)
      if (i & bit_of(n_, record[b])) key[b] = '1';
    return key;
  };
  std::map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> masks;  // record value -> (x, z)
  const auto d = rho_.rows();
  CMatrix out = CMatrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto uj = static_cast<std::uint64_t>(j);
    const auto rj = uj & rmask;
    auto it = masks.find(rj);
    if (it == masks.end()) {
      auto t = c.table.find(key_of(uj));
      if (t == c.table.end()) throw ValidationError("correction table is not total");
      if (static_cast<int>(t->second.size()) != n_) throw ValidationError("correction word length != width");
      it = masks.emplace(rj, std::make_pair(t->second.x_mask(), t->second.z_mask())).first;
    }
    const auto [x, z] = it->second;
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto ui = static_cast<std::uint64_t>(i);
      if ((ui & rmask) != rj) continue;
      const double s = parity((ui ^ uj) & z) ? -1.0 : 1.0;
      out(static_cast<Eigen::Index>(ui ^ x), static_cast<Eigen::Index>(uj ^ x)) += s * rho_(i, j);
    }
  }
  rho_.swap(out);
}

RVector DensityMatrix::diagonal() const { return rho_.diagonal().real(); }

DensityMatrix DensityMatrix::leading_marginal(int keep) const {
  if (keep < 0 || keep > n_) throw ValidationError("marginal size out of range");
  const auto a = Eigen::Index{1} << (n_ - keep);
  const auto d = Eigen::Index{1} << keep;
  CMatrix r = CMatrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index t = 0; t < a; ++t) r(i, j) += rho_(i * a + t, j * a + t);
  return from_matrix(std::move(r));
}

// ----------------------------------------------------------------- engines

DensityMatrix rc_output_state(const Circuit& c, const NoiseBindings& b) {
  check_width(c.width());
  if (b.per_op.size() != c.size()) throw ValidationError("bindings do not match the circuit");
  DensityMatrix rho(c.width());
  std::map<std::string, int> label_qubit;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& op = c[i];
    if (op.is<MeasureOp>()) {
      if (b.per_op[i]) rho.apply_channel(*b.per_op[i]);
      const auto& m = op.as<MeasureOp>();
      rho.dephase(m.qubit);
      label_qubit[m.label] = m.qubit;
      continue;
    }
    if (op.is<CorrectionOp>()) {
      const auto& corr = op.as<CorrectionOp>();
      std::vector<int> record;
      for (const auto& l : corr.labels) {
        auto it = label_qubit.find(l);
        if (it == label_qubit.end()) throw ValidationError("correction uses unmeasured label " + l);
        record.push_back(it->second);
      }
      rho.apply_correction(corr, record);
    } else {
      rho.apply_gate(op);
    }
    if (b.per_op[i]) rho.apply_channel(*b.per_op[i]);
  }
  DensityMatrix data = c.data_width() == c.width() ? rho : rho.leading_marginal(c.data_width());
  for (const auto& r : b.readout)
    if (r) data.apply_channel(*r);
  return data;
}

Trajectory run_trajectory(const Circuit& c, const NoiseBindings* b, const std::map<std::string, int>& forced, Rng* rng) {
  check_width(c.width());
  if (b && b->per_op.size() != c.size()) throw ValidationError("bindings do not match the circuit");
  Trajectory t{StateVector(c.width()), {}, 1.0};
  auto noise = [&](std::size_t i) {
    if (!b || !b->per_op[i]) return;
    if (!rng) throw ValidationError("noisy trajectory requires an rng");
    const auto& ch = *b->per_op[i];
    const auto idx = ch.sample_index(*rng);
    if (idx != ch.identity_index()) t.state.apply_pauli(ch.global_word(idx, c.width()));
  };
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& op = c[i];
    if (op.is<MeasureOp>()) {
      noise(i);
      const auto& m = op.as<MeasureOp>();
      int a;
      auto it = forced.find(m.label);
      if (it != forced.end()) {
        a = it->second;
        t.probability *= t.state.project(m.qubit, a);
      } else {
        if (!rng) throw ValidationError("unforced measurement requires an rng");
        const double p1 = t.state.prob1(m.qubit);
        a = t.state.measure(m.qubit, *rng);
        t.probability *= a ? p1 : 1.0 - p1;
      }
      t.outcomes[m.label] = a;
      continue;
    }
    if (op.is<CorrectionOp>()) {
      t.state.apply_pauli(op.as<CorrectionOp>().lookup(t.outcomes));
    } else {
      t.state.apply_gate(op);
    }
    noise(i);
  }
  return t;
}

DensityMatrix mc_rc_output_state(const Circuit& c, const NoiseBindings& b, std::size_t trials, Rng& rng) {
  if (trials < 1) throw ValidationError("need at least one trajectory");
  const int dw = c.data_width();
  const auto dd = Eigen::Index{1} << dw;
  const auto aa = Eigen::Index{1} << (c.width() - dw);
  CMatrix acc = CMatrix::Zero(dd, dd);
  for (std::size_t t = 0; t < trials; ++t) {
    auto traj = run_trajectory(c, &b, {}, &rng);
    for (const auto& r : b.readout) {
      if (!r) continue;
      const auto idx = r->sample_index(rng);
      if (idx != r->identity_index()) traj.state.apply_pauli(r->global_word(idx, c.width()));
    }
    // Reshape psi into (data x ancilla); the reduced state is Psi Psi^dag.
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> psi(
        traj.state.amplitudes().data(), dd, aa);
    acc.noalias() += psi * psi.adjoint();
  }
  acc /= static_cast<double>(trials);
  return DensityMatrix::from_matrix(std::move(acc));
}

double diag_distance(const RVector& p, const RVector& q) {
  if (p.size() != q.size()) throw ValidationError("distributions have different sizes");
  return (p - q).norm();
}

double diag_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.size() != sigma.size()) throw ValidationError("states have different widths");
  return diag_distance(rho.diagonal(), sigma.diagonal());
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.size() != sigma.size()) throw ValidationError("states have different widths");
  const CMatrix d = rho.matrix() - sigma.matrix();
  const CMatrix h = 0.5 * (d + d.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

std::vector<std::uint64_t> sample_indices(const RVector& probs, std::size_t shots, Rng& rng) {
  if (shots < 1) throw ValidationError("need at least one shot");
  std::vector<double> cdf(static_cast<std::size_t>(probs.size()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (probs(i) < -1e-10 || !std::isfinite(probs(i))) throw ValidationError("invalid probability entry");
    acc += std::max(probs(i), 0.0);
    cdf[static_cast<std::size_t>(i)] = acc;
  }
  if (std::abs(acc - 1.0) > 1e-8) throw ValidationError("distribution is not normalized");
  std::vector<std::uint64_t> out(shots);
  for (auto& o : out) {
    const double u = uniform01(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    auto idx = static_cast<std::size_t>(it - cdf.begin());
    if (idx >= cdf.size()) idx = cdf.size() - 1;
    while (idx > 0 && probs(static_cast<Eigen::Index>(idx)) <= 0.0) --idx;
    o = idx;
  }
  return out;
}

std::vector<Bitstring> sample_bitstrings(const RVector& probs, int n, std::size_t shots, Rng& rng) {
  if (probs.size() != (Eigen::Index{1} << n)) throw ValidationError("distribution size does not match width");
  std::vector<Bitstring> out;
  out.reserve(shots);
  for (auto i : sample_indices(probs, shots, rng)) out.push_back(index_bits(i, n));
  return out;
}

double encoded_subspace_weight(const RVector& probs, int n) {
  if (n % 2 != 0) throw ValidationError("encoded subspace needs an even number of qubits");
  if (probs.size() != (Eigen::Index{1} << n)) throw ValidationError("distribution size does not match width");
  const int m = n / 2;
  double w = 0.0;
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << m); ++x) {
    std::uint64_t idx = 0;
    for (int i = 0; i < m; ++i) {
      const auto bit = (x >> (m - 1 - i)) & 1u;
      idx = (idx << 2) | (bit ? 3u : 0u);
    }
    w += probs(static_cast<Eigen::Index>(idx));
  }
  return w;
}

double encoded_subspace_weight(const DensityMatrix& rho) { return encoded_subspace_weight(rho.diagonal(), rho.size()); }

RMatrix covariance_of(const StateVector& s) {
  const int n = s.size();
  std::vector<CMatrix> c;
  for (int i = 0; i < 2 * n; ++i) c.push_back(majorana_dense(i, n));
  RMatrix g = RMatrix::Zero(2 * n, 2 * n);
  const CVector& v = s.amplitudes();
  for (int i = 0; i < 2 * n; ++i) {
    const CVector ci = c[static_cast<std::size_t>(i)].adjoint() * v;
    for (int j = 0; j < 2 * n; ++j) {
      if (i == j) continue;
      const cplx e = ci.dot(c[static_cast<std::size_t>(j)] * v);
      g(i, j) = (cplx(0, 1) * e).real();
    }
  }
  return g;
}

namespace {

void write_payload(const std::string& path, int n, std::uint32_t kind, const cplx* data, std::size_t count) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SimulationError("cannot write " + path);
  out.write(kStateMagic, sizeof(kStateMagic));
  const std::uint32_t header[2] = {static_cast<std::uint32_t>(n), kind};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  static_assert(sizeof(cplx) == 2 * sizeof(double));
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(cplx)));
}

}  // namespace

void write_state(const std::string& path, const StateVector& s) {
  write_payload(path, s.size(), 0, s.amplitudes().data(), static_cast<std::size_t>(s.amplitudes().size()));
}

void write_state(const std::string& path, const DensityMatrix& rho) {
  // Row-major on disk.
  const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = rho.matrix();
  write_payload(path, rho.size(), 1, rm.data(), static_cast<std::size_t>(rm.size()));
}

DensityMatrix read_state(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  char magic[8];
  std::uint32_t header[2];
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in || std::memcmp(magic, kStateMagic, 8) != 0) throw ValidationError(path + " is not a state dump");
  const int n = static_cast<int>(header[0]);
  check_width(n);
  const auto d = Eigen::Index{1} << n;
  if (header[1] == 0) {
    CVector v(d);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(d * sizeof(cplx)));
    if (!in) throw ValidationError("truncated state dump");
    return DensityMatrix::from_matrix(v * v.adjoint());
  }
  Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(d, d);
  in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(d * d * sizeof(cplx)));
  if (!in) throw ValidationError("truncated state dump");
  return DensityMatrix::from_matrix(CMatrix(rm));
}

void write_diagonal_csv(const std::string& path, const RVector& probs) {
  std::ofstream out(path);
  if (!out) throw SimulationError("cannot write " + path);
  out << "index,probability\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < probs.size(); ++i) out << i << ',' << probs(i) << '\n';
}

}  // namespace mgv
