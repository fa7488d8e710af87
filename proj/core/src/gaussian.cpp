#include "mgverify/gaussian.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "mgverify/majorana.hpp"

namespace mgv {

namespace {

constexpr double kZeroProbability = 1e-12;
constexpr double kPurityThreshold = 1e-8;
constexpr std::size_t kCheckInterval = 4096;

RVector signs_vector(const PauliString& p) {
  const auto s = pauli_conjugation_signs(p);
  RVector d(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) d(static_cast<Eigen::Index>(i)) = s[i];
  return d;
}

}  // namespace

CovarianceState::CovarianceState(int n) : n_(n) {
  if (n < 0) throw ValidationError("covariance state needs n >= 0");
  g_ = RMatrix::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    g_(2 * k, 2 * k + 1) = -1.0;
    g_(2 * k + 1, 2 * k) = 1.0;
  }
}

CovarianceState CovarianceState::from_matrix(RMatrix gamma) {
  if (gamma.rows() != gamma.cols() || gamma.rows() % 2 != 0) throw ValidationError("covariance matrix must be 2n x 2n");
  CovarianceState s(static_cast<int>(gamma.rows() / 2));
  s.g_ = std::move(gamma);
  if (!s.is_antisymmetric()) throw ValidationError("covariance matrix is not antisymmetric");
  if (s.purity_error() > kPurityThreshold) throw ValidationError("covariance matrix is not pure");
  return s;
}

void CovarianceState::apply_orthogonal(const RMatrix& r) {
  if (r.rows() != g_.rows() || r.cols() != g_.cols()) throw ValidationError("orthogonal matrix has wrong size");
  if ((r * r.transpose() - RMatrix::Identity(r.rows(), r.cols())).cwiseAbs().maxCoeff() > 1e-9)
    throw ValidationError("matrix is not orthogonal");
  g_ = r * g_ * r.transpose();
}

void CovarianceState::apply_block(const Eigen::Matrix4d& s, int mode) {
  if (mode < 0 || mode + 4 > g_.rows()) throw ValidationError("block outside the mode range");
  // One pass over the columns: rows mode..mode+3 of column j become S times
  // their old values, and row j of the block columns follows by antisymmetry.
  const Eigen::Matrix4d old = g_.block(mode, mode, 4, 4);
  const Eigen::Index dim = g_.rows();
  double* data = g_.data();
  double* bc[4];
  for (int c = 0; c < 4; ++c) bc[c] = data + (mode + c) * dim;
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (j == mode) {
      j += 3;
      continue;
    }
    double* col = data + j * dim + mode;
    const Eigen::Vector4d v = s * Eigen::Map<const Eigen::Vector4d>(col);
    Eigen::Map<Eigen::Vector4d>{col} = v;
    bc[0][j] = -v(0);
    bc[1][j] = -v(1);
    bc[2][j] = -v(2);
    bc[3][j] = -v(3);
  }
  const Eigen::Matrix4d blk = s * old * s.transpose();
  g_.block(mode, mode, 4, 4) = 0.5 * (blk - blk.transpose());
}

void CovarianceState::apply_matchgate(const Matchgate& m) {
  if (m.second() >= n_) throw ValidationError("matchgate outside the register");
  apply_block(covariance_block(m), 2 * m.first());
}

void CovarianceState::apply_pauli(const PauliString& p) {
  if (static_cast<int>(p.size()) != n_) throw ValidationError("Pauli word length does not match state");
  apply_signs(signs_vector(p));
}

void CovarianceState::apply_signs(const RVector& d) {
  if (d.size() != g_.rows()) throw ValidationError("sign vector has wrong size");
  Eigen::Index minus = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) minus += d(i) < 0;
  // D Gamma D is unchanged by D -> -D.
  const bool complement = 2 * minus > d.size();
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if ((d(i) < 0) != complement) flip_mode(i);
}

void CovarianceState::flip_mode(Eigen::Index i) {
  g_.row(i) *= -1.0;
  g_.col(i) *= -1.0;
}

void CovarianceState::apply_local_pauli(const PauliString& word, std::span<const int> qubits) {
  if (word.size() != qubits.size()) throw ValidationError("word and qubit list differ in length");
  if (qubits.empty()) return;
  const auto [lo_it, hi_it] = std::minmax_element(qubits.begin(), qubits.end());
  const int lo = *lo_it, hi = *hi_it;
  if (lo < 0 || hi >= n_) throw ValidationError("Pauli outside the register");
  std::vector<Pauli> letters(static_cast<std::size_t>(hi - lo + 1), Pauli::I);
  for (std::size_t i = 0; i < qubits.size(); ++i) letters[static_cast<std::size_t>(qubits[i] - lo)] = word[i];
  // Local sign pattern on modes [2 lo, 2 hi + 2); modes above flip iff the X/Y count is odd.
  std::vector<char> flip(2 * letters.size());
  unsigned left = 0;
  for (std::size_t k = 0; k < letters.size(); ++k) {
    const Pauli l = letters[k];
    flip[2 * k] = ((left + (l == Pauli::Y || l == Pauli::Z)) & 1u) != 0;
    flip[2 * k + 1] = ((left + (l == Pauli::X || l == Pauli::Z)) & 1u) != 0;
    left += has_x(l);
  }
  const Eigen::Index base = 2 * lo;
  if ((left & 1u) == 0) {
    for (std::size_t m = 0; m < flip.size(); ++m)
      if (flip[m]) flip_mode(base + static_cast<Eigen::Index>(m));
    return;
  }
  // Odd: flip the complement instead, i.e. modes below 2 lo and the unflipped local modes.
  for (Eigen::Index m = 0; m < base; ++m) flip_mode(m);
  for (std::size_t m = 0; m < flip.size(); ++m)
    if (!flip[m]) flip_mode(base + static_cast<Eigen::Index>(m));
}

double CovarianceState::prob1(int k) const {
  if (k < 0 || k >= n_) throw ValidationError("qubit index out of range");
  return std::clamp((1.0 + g_(2 * k, 2 * k + 1)) / 2.0, 0.0, 1.0);
}

double CovarianceState::project(int k, int outcome, int first_mode) {
  const double p1 = prob1(k);
  const double prob = outcome ? p1 : 1.0 - p1;
  if (prob < kZeroProbability) throw SimulationError("projection onto a zero-probability outcome");
  const int p = 2 * k, q = 2 * k + 1;
  const double s = outcome ? -1.0 : 1.0;
  const double denom = 1.0 - s * g_(p, q);
  const Eigen::Index lo = std::min(first_mode, p);
  const Eigen::Index len = g_.rows() - lo;
  const RVector u = g_.col(p).segment(lo, len);
  const RVector v = g_.col(q).segment(lo, len);
  // Gamma' = Gamma + s (u v^T - v u^T) / denom on the trailing block.
  g_.block(lo, lo, len, len).noalias() += (s / denom) * (u * v.transpose() - v * u.transpose());
  g_.row(p).setZero();
  g_.row(q).setZero();
  g_.col(p).setZero();
  g_.col(q).setZero();
  g_(p, q) = -s;
  g_(q, p) = s;
  return prob;
}

double CovarianceState::purity_error() const {
  if (g_.size() == 0) return 0.0;
  return (g_ * g_.transpose() - RMatrix::Identity(g_.rows(), g_.cols())).cwiseAbs().maxCoeff();
}

bool CovarianceState::is_antisymmetric(double tol) const {
  return g_.size() == 0 || (g_ + g_.transpose()).cwiseAbs().maxCoeff() <= tol;
}

bool CovarianceState::reorthogonalize_if_needed() {
  if (purity_error() <= kPurityThreshold) return false;
  Eigen::JacobiSVD<RMatrix> svd(g_, Eigen::ComputeFullU | Eigen::ComputeFullV);
  RMatrix polar = svd.matrixU() * svd.matrixV().transpose();
  g_ = 0.5 * (polar - polar.transpose());
  ++reorth_;
  return true;
}

Eigen::Matrix4d covariance_block(const Matchgate& m) {
  // U c U^dag = R c gives Gamma <- R^T Gamma R.
  return matchgate_orthogonal_block(m.matrix()).transpose();
}

std::vector<double> conditional_marginals(CovarianceState s, const Bitstring& bits) {
  if (static_cast<int>(bits.size()) > s.size()) throw ValidationError("bitstring longer than the register");
  std::vector<double> out;
  for (std::size_t k = 0; k < bits.size(); ++k) {
    const double p1 = s.prob1(static_cast<int>(k));
    out.push_back(p1);
    if (k + 1 == bits.size()) break;
    if ((bits[k] ? p1 : 1.0 - p1) < kZeroProbability) {
      out.resize(bits.size(), 0.0);
      break;
    }
    s.project(static_cast<int>(k), bits[k], 2 * static_cast<int>(k));
  }
  return out;
}

std::vector<std::pair<std::uint64_t, double>> exact_distribution(const CovarianceState& s, int qubits, double cutoff) {
  if (qubits < 0 || qubits > s.size() || qubits > 62) throw ValidationError("invalid qubit count for exact distribution");
  std::vector<std::pair<std::uint64_t, double>> out;
  struct Frame {
    CovarianceState state;
    int k;
    std::uint64_t prefix;
    double prob;
  };
  std::vector<Frame> stack;
  stack.push_back({s, 0, 0, 1.0});
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (f.k == qubits) {
      out.emplace_back(f.prefix, f.prob);
      continue;
    }
    const double p1 = f.state.prob1(f.k);
    for (int a : {1, 0}) {
      const double pa = a ? p1 : 1.0 - p1;
      const double w = f.prob * pa;
      if (pa < kZeroProbability || w <= cutoff) continue;
      CovarianceState child = f.state;
      if (f.k + 1 < qubits) child.project(f.k, a, 2 * f.k);
      stack.push_back({std::move(child), f.k + 1, (f.prefix << 1) | static_cast<std::uint64_t>(a), w});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ------------------------------------------------------------- compilation

struct WeakSampler::Compiled {
  enum class Kind { Block, Signs, Measure, Correction } kind = Kind::Block;
  Eigen::Matrix4d block;
  int mode = 0;
  RVector signs;
  int qubit = 0;
  int label = -1;
  std::vector<int> record;  // label indices
  std::vector<RVector> table;  // indexed by outcome value
  std::vector<std::uint64_t> table_x;  // X masks of the correction words (lines flipped)
};

namespace {

void require_gaussian(const CircuitOp& op) {
  if (op.is<SingleQubitOp>() || op.is<CzOp>())
    throw ValidationError("Gaussian simulation supports matchgates, Paulis, Z measurements and Pauli corrections only");
}

}  // namespace

CovarianceState run_gaussian(const Circuit& c, const std::map<std::string, int>& forced, double* probability) {
  c.validate();
  CovarianceState s(c.width());
  std::map<std::string, int> outcomes;
  double prob = 1.0;
  for (const auto& op : c.ops()) {
    require_gaussian(op);
    if (op.is<MatchgateOp>()) {
      s.apply_matchgate(op.as<MatchgateOp>().gate);
    } else if (op.is<PauliOp>()) {
      s.apply_pauli(op.as<PauliOp>().word);
    } else if (op.is<MeasureOp>()) {
      const auto& m = op.as<MeasureOp>();
      auto it = forced.find(m.label);
      if (it == forced.end()) throw ValidationError("run_gaussian needs an outcome for label " + m.label);
      prob *= s.project(m.qubit, it->second);
      outcomes[m.label] = it->second;
      s.reorthogonalize_if_needed();
    } else if (op.is<CorrectionOp>()) {
      s.apply_pauli(op.as<CorrectionOp>().lookup(outcomes));
    }
  }
  if (probability) *probability = prob;
  return s;
}

WeakSampler::WeakSampler(const Circuit& c) : WeakSampler(c, NoiseBindings::noiseless(c)) {}

WeakSampler::WeakSampler(const Circuit& c, NoiseBindings bindings)
    : width_(c.width()), data_width_(c.data_width()), bindings_(std::move(bindings)) {
  c.validate();
  if (bindings_.per_op.size() != c.size()) throw ValidationError("bindings do not match the circuit");
  if (!bindings_.readout.empty() && static_cast<int>(bindings_.readout.size()) != data_width_)
    throw ValidationError("readout bindings do not match the data register");
  std::map<std::string, int> label_index;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& op = c[i];
    require_gaussian(op);
    auto comp = std::make_shared<Compiled>();
    if (op.is<MatchgateOp>()) {
      const auto& g = op.as<MatchgateOp>().gate;
      comp->kind = Compiled::Kind::Block;
      comp->block = covariance_block(g);
      comp->mode = 2 * g.first();
    } else if (op.is<PauliOp>()) {
      comp->kind = Compiled::Kind::Signs;
      comp->signs = signs_vector(op.as<PauliOp>().word);
    } else if (op.is<MeasureOp>()) {
      const auto& m = op.as<MeasureOp>();
      comp->kind = Compiled::Kind::Measure;
      comp->qubit = m.qubit;
      comp->label = static_cast<int>(labels_.size());
      label_index[m.label] = comp->label;
      labels_.push_back(m.label);
    } else {
      const auto& corr = op.as<CorrectionOp>();
      comp->kind = Compiled::Kind::Correction;
      for (const auto& l : corr.labels) comp->record.push_back(label_index.at(l));
      const std::size_t k = corr.labels.size();
      for (std::size_t v = 0; v < (std::size_t{1} << k); ++v) {
        std::string key(k, '0');
        for (std::size_t b = 0; b < k; ++b)
          if ((v >> (k - 1 - b)) & 1u) key[b] = '1';
        const auto& w = corr.table.at(key);
        comp->table.push_back(signs_vector(w));
        comp->table_x.push_back(w.x_mask());
      }
    }
    ops_.push_back(std::move(comp));
  }
  for (const auto& r : bindings_.readout) {
    if (r && r->qubits().size() != 1) throw ValidationError("readout channels must act on a single qubit");
    readout_eps_.push_back(r ? r->channel().flip_probability(0) : 0.0);
  }
  readout_eps_.resize(static_cast<std::size_t>(data_width_), 0.0);
  // Noiseless prefix: stop at the first noisy or classical op.
  prefix_ = CovarianceState(width_);
  for (; prefix_len_ < c.size(); ++prefix_len_) {
    const auto& comp = *ops_[prefix_len_];
    const auto& bind = bindings_.per_op[prefix_len_];
    if (comp.kind == Compiled::Kind::Measure || comp.kind == Compiled::Kind::Correction) break;
    if (bind && !bind->channel().is_identity()) break;
    if (comp.kind == Compiled::Kind::Block) prefix_.apply_block(comp.block, comp.mode);
    else prefix_.apply_signs(comp.signs);
  }
  prefix_.reorthogonalize_if_needed();
}

WeakSample WeakSampler::run(Rng& rng, bool record) const {
  WeakSample out;
  CovarianceState s = prefix_;
  std::vector<int> outcomes(labels_.size(), 0);
  std::size_t since_check = 0;
  for (std::size_t i = prefix_len_; i < ops_.size(); ++i) {
    const auto& comp = *ops_[i];
    const auto& bind = bindings_.per_op[i];
    auto apply_noise = [&] {
      if (!bind) return;
      const auto idx = bind->sample_index(rng);
      if (idx == bind->identity_index()) return;
      s.apply_local_pauli(bind->words()[idx], bind->qubits());
      if (record) out.paulis.emplace_back(i, bind->global_word(idx, width_));
    };
    switch (comp.kind) {
      case Compiled::Kind::Block:
        s.apply_block(comp.block, comp.mode);
        apply_noise();
        ++since_check;
        break;
      case Compiled::Kind::Signs:
        s.apply_signs(comp.signs);
        apply_noise();
        break;
      case Compiled::Kind::Measure: {
        apply_noise();
        const double p1 = s.prob1(comp.qubit);
        int a = uniform01(rng) < p1 ? 1 : 0;
        if ((a ? p1 : 1.0 - p1) < kZeroProbability) a ^= 1;
        s.project(comp.qubit, a);
        outcomes[static_cast<std::size_t>(comp.label)] = a;
        s.reorthogonalize_if_needed();
        since_check = 0;
        break;
      }
      case Compiled::Kind::Correction: {
        std::size_t v = 0;
        for (int l : comp.record) v = (v << 1) | static_cast<std::size_t>(outcomes[static_cast<std::size_t>(l)]);
        s.apply_signs(comp.table[v]);
        apply_noise();
        break;
      }
    }
    if (since_check >= kCheckInterval) {
      s.reorthogonalize_if_needed();
      since_check = 0;
    }
  }
  if (since_check > 0) s.reorthogonalize_if_needed();
  out.bits.resize(static_cast<std::size_t>(data_width_));
  for (int k = 0; k < data_width_; ++k) {
    const double p1 = s.prob1(k);
    int a = uniform01(rng) < p1 ? 1 : 0;
    if ((a ? p1 : 1.0 - p1) < kZeroProbability) a ^= 1;
    if (k + 1 < data_width_) s.project(k, a, 2 * k);
    const double eps = readout_eps_[static_cast<std::size_t>(k)];
    if (eps > 0.0 && uniform01(rng) < eps) a ^= 1;
    out.bits[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(a);
  }
  if (record)
    for (std::size_t l = 0; l < labels_.size(); ++l) out.outcomes[labels_[l]] = outcomes[l];
  return out;
}

WeakSample WeakSampler::sample(Rng& rng) const { return run(rng, true); }

Bitstring WeakSampler::sample_bits(Rng& rng) const { return run(rng, false).bits; }

std::vector<Bitstring> WeakSampler::sample(std::size_t shots, Rng& rng) const {
  std::vector<Bitstring> out;
  out.reserve(shots);
  for (std::size_t i = 0; i < shots; ++i) out.push_back(sample_bits(rng));
  return out;
}

WeakSample weak_sample(const Circuit& c, const NoiseBindings& b, Rng& rng) { return WeakSampler(c, b).sample(rng); }

}  // namespace mgv
