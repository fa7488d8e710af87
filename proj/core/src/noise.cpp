#include "mgverify/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <unsupported/Eigen/MatrixFunctions>

#include "mgverify/majorana.hpp"

namespace mgv {

namespace {

constexpr double kSumTolerance = 1e-12;
constexpr double kClamp = 1e-12;

std::set<int> support_set(const PauliString& p) {
  std::set<int> s;
  for (auto q : p.support()) s.insert(static_cast<int>(q));
  return s;
}

}  // namespace

PauliChannel::PauliChannel(int k) : k_(k) {
  if (k < 0) throw ValidationError("channel size must be non-negative");
  entries_.emplace(PauliString(static_cast<std::size_t>(k)), 1.0);
}

PauliChannel::PauliChannel(int k, std::map<PauliString, double> entries, bool renormalize) : k_(k) {
  double sum = 0.0;
  for (auto& [p, c] : entries) {
    if (static_cast<int>(p.size()) != k) throw ValidationError("Pauli word length does not match channel size");
    if (!std::isfinite(c)) throw ValidationError("non-finite channel coefficient");
    if (c < 0.0) {
      if (c < -kClamp) throw ValidationError("negative channel coefficient for " + p.str());
      c = 0.0;
    }
    sum += c;
  }
  if (sum <= 0.0) throw ValidationError("channel has no weight");
  if (!renormalize && std::abs(sum - 1.0) > kSumTolerance * std::max<std::size_t>(1, entries.size()))
    throw ValidationError("channel coefficients do not sum to 1");
  for (auto& [p, c] : entries)
    if (c > 0.0) entries_.emplace(p, c / sum);
}

double PauliChannel::coefficient(const PauliString& p) const {
  auto it = entries_.find(p);
  return it == entries_.end() ? 0.0 : it->second;
}

PauliChannel PauliChannel::compose(const PauliChannel& other) const {
  if (other.k_ != k_) throw ValidationError("cannot compose channels of different size");
  std::map<PauliString, double> out;
  for (const auto& [p, a] : entries_)
    for (const auto& [q, b] : other.entries_) out[pauli_mul(p, q)] += a * b;
  return PauliChannel(k_, std::move(out), true);
}

PauliChannel PauliChannel::embedded(int k, std::span<const int> positions) const {
  if (static_cast<int>(positions.size()) != k_) throw ValidationError("embedding size mismatch");
  std::map<PauliString, double> out;
  for (const auto& [p, c] : entries_) out[p.embedded(static_cast<std::size_t>(k), positions)] += c;
  return PauliChannel(k, std::move(out), true);
}

double PauliChannel::flip_probability(int q) const {
  double eps = 0.0;
  for (const auto& [p, c] : entries_)
    if (has_x(p[static_cast<std::size_t>(q)])) eps += c;
  return eps;
}

bool PauliChannel::is_identity() const {
  return entries_.size() == 1 && entries_.begin()->first.is_identity();
}

nlohmann::json PauliChannel::to_json() const {
  nlohmann::json e = nlohmann::json::object();
  for (const auto& [p, c] : entries_) e[p.str()] = c;
  return {{"n", k_}, {"entries", e}};
}

PauliChannel PauliChannel::from_json(const nlohmann::json& j) {
  try {
    const int k = j.at("n").get<int>();
    std::map<PauliString, double> entries;
    for (const auto& [w, c] : j.at("entries").items()) entries[PauliString::parse(w)] += c.get<double>();
    return PauliChannel(k, std::move(entries));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed Pauli channel: ") + e.what());
  }
}

BoundPauliChannel::BoundPauliChannel(std::vector<int> qubits, PauliChannel channel)
    : qubits_(std::move(qubits)), channel_(std::move(channel)) {
  if (static_cast<int>(qubits_.size()) != channel_.size()) throw ValidationError("binding size mismatch");
  std::set<int> uniq(qubits_.begin(), qubits_.end());
  if (uniq.size() != qubits_.size()) throw ValidationError("binding repeats a qubit");
  // Heaviest words first so the linear scan in sample_index stops early.
  std::vector<std::pair<double, PauliString>> sorted;
  for (const auto& [p, c] : channel_.entries()) sorted.emplace_back(c, p);
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  double acc = 0.0;
  identity_ = sorted.size();
  for (const auto& [c, p] : sorted) {
    if (p.is_identity()) identity_ = words_.size();
    words_.push_back(p);
    probs_.push_back(c);
    acc += c;
    cdf_.push_back(acc);
  }
  if (!cdf_.empty()) cdf_.back() = 1.0;
}

std::size_t BoundPauliChannel::sample_index(Rng& rng) const {
  const double u = uniform01(rng);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
}

PauliString BoundPauliChannel::global_word(std::size_t index, int width) const {
  return words_.at(index).embedded(static_cast<std::size_t>(width), qubits_);
}

BoundPauliChannel compose(const BoundPauliChannel& a, const BoundPauliChannel& b) {
  std::set<int> uni(a.qubits().begin(), a.qubits().end());
  uni.insert(b.qubits().begin(), b.qubits().end());
  std::vector<int> qubits(uni.begin(), uni.end());
  auto positions = [&](const std::vector<int>& qs) {
    std::vector<int> pos;
    for (int q : qs) pos.push_back(static_cast<int>(std::lower_bound(qubits.begin(), qubits.end(), q) - qubits.begin()));
    return pos;
  };
  const int k = static_cast<int>(qubits.size());
  const auto pa = positions(a.qubits());
  const auto pb = positions(b.qubits());
  auto ca = a.channel().embedded(k, pa);
  auto cb = b.channel().embedded(k, pb);
  return BoundPauliChannel(std::move(qubits), ca.compose(cb));
}

LocalChannel LocalChannel::identity(std::vector<int> targets) {
  const auto d = std::size_t{1} << targets.size();
  return {std::move(targets), {CMatrix::Identity(d, d)}};
}

LocalChannel LocalChannel::unitary(const CMatrix& u, std::vector<int> targets) {
  const auto d = std::size_t{1} << targets.size();
  if (u.rows() != static_cast<Eigen::Index>(d) || u.cols() != static_cast<Eigen::Index>(d))
    throw ValidationError("unitary dimension does not match targets");
  return {std::move(targets), {u}};
}

LocalChannel LocalChannel::from_pauli(const BoundPauliChannel& c) {
  LocalChannel out{c.qubits(), {}};
  for (const auto& [p, w] : c.channel().entries()) out.kraus.push_back(std::sqrt(w) * pauli_dense(p));
  return out;
}

bool LocalChannel::is_cptp(double tol) const {
  if (kraus.empty()) return false;
  const auto d = kraus.front().rows();
  CMatrix s = CMatrix::Zero(d, d);
  for (const auto& k : kraus) {
    if (k.rows() != d || k.cols() != d) return false;
    s += k.adjoint() * k;
  }
  return (s - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() <= tol;
}

LocalChannel LocalChannel::after(const LocalChannel& first) const {
  if (first.targets != targets) throw ValidationError("channel support mismatch");
  LocalChannel out{targets, {}};
  for (const auto& a : kraus)
    for (const auto& b : first.kraus) out.kraus.push_back(a * b);
  return out;
}

RMatrix LocalChannel::ptm() const {
  const auto k = targets.size();
  const auto words = all_paulis(k);
  const double d = static_cast<double>(std::size_t{1} << k);
  std::vector<CMatrix> mats;
  for (const auto& w : words) mats.push_back(pauli_dense(w));
  RMatrix r(words.size(), words.size());
  for (std::size_t q = 0; q < words.size(); ++q) {
    CMatrix out = CMatrix::Zero(mats[q].rows(), mats[q].cols());
    for (const auto& kr : kraus) out += kr * mats[q] * kr.adjoint();
    for (std::size_t p = 0; p < words.size(); ++p) r(p, q) = (mats[p] * out).trace().real() / d;
  }
  return r;
}

BoundPauliChannel crosstalk_channel(int t, int b, double p_c) {
  if (!(p_c >= 0.0 && p_c <= 1.0)) throw ValidationError("crosstalk probability outside [0, 1]");
  if (t == b) throw ValidationError("crosstalk needs two distinct qubits");
  std::map<PauliString, double> e;
  e[PauliString::parse("II")] += 1.0 - p_c;
  for (const char* w : {"XX", "XY", "YX", "YY"}) e[PauliString::parse(w)] += p_c / 4.0;
  return BoundPauliChannel({t, b}, PauliChannel(2, std::move(e), true));
}

BoundPauliChannel gate_crosstalk(std::span<const int> targets, int width, double p_c) {
  std::vector<int> t(targets.begin(), targets.end());
  BoundPauliChannel acc(t, PauliChannel(static_cast<int>(t.size())));
  for (int q : targets)
    for (int b : {q - 1, q + 1}) {
      if (b < 0 || b >= width) continue;
      acc = compose(acc, crosstalk_channel(q, b, p_c));
    }
  return acc;
}

LocalChannel overrotation_channel(const GateGenerator& g, double gamma, int first) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ValidationError("overrotation scale must be >= 0");
  GateGenerator over;
  for (std::size_t i = 0; i < g.coeffs.size(); ++i) over.coeffs[i] = gamma * std::abs(g.coeffs[i]);
  return LocalChannel::unitary(over.unitary(), {first, first + 1});
}

BoundPauliChannel pauli_twirl(const LocalChannel& e) {
  if (!e.is_cptp()) throw ValidationError("twirl input is not CPTP");
  const auto k = e.targets.size();
  const auto words = all_paulis(k);
  const double d = static_cast<double>(std::size_t{1} << k);
  std::map<PauliString, double> c;
  for (const auto& w : words) {
    const CMatrix p = pauli_dense(w);
    double acc = 0.0;
    for (const auto& kr : e.kraus) acc += std::norm((p * kr).trace() / d);
    if (acc > kClamp) c[w] = acc;
  }
  return BoundPauliChannel(e.targets, PauliChannel(static_cast<int>(k), std::move(c), true));
}

BoundPauliChannel compose_noisy_pauli(const LocalChannel& delta, const LocalChannel& e) {
  return pauli_twirl(delta.after(e));
}

MeasurementError measurement_error_params(const LocalChannel& e, int qubit) {
  auto it = std::find(e.targets.begin(), e.targets.end(), qubit);
  if (it == e.targets.end()) throw ValidationError("measured qubit outside the channel support");
  MeasurementError out{pauli_twirl(e), 0.0};
  out.epsilon = out.channel.channel().flip_probability(static_cast<int>(it - e.targets.begin()));
  return out;
}

std::vector<double> drift_schedule(double gamma, double gamma_tilde, int layers) {
  if (layers < 1) throw ValidationError("drift schedule needs at least one layer");
  std::vector<double> g(static_cast<std::size_t>(layers));
  for (int l = 0; l < layers; ++l) {
    const double f = static_cast<double>(l) / layers;
    g[static_cast<std::size_t>(l)] = gamma * (1.0 - f + f * gamma_tilde);
  }
  return g;
}

BoundPauliChannel perturb_pauli_channel(const BoundPauliChannel& c, double eps, Rng& rng) {
  if (!(eps >= 0.0)) throw ValidationError("perturbation radius must be >= 0");
  if (eps == 0.0) return c;
  const auto k = c.qubits().size();
  std::vector<std::set<int>> supports;
  for (const auto& [q, w] : c.channel().entries())
    if (w > 0.0) supports.push_back(support_set(q));
  std::vector<PauliString> admissible;
  for (const auto& p : all_paulis(k)) {
    const auto s = support_set(p);
    for (const auto& sq : supports)
      if (std::includes(sq.begin(), sq.end(), s.begin(), s.end())) {
        admissible.push_back(p);
        break;
      }
  }
  if (admissible.empty()) throw ValidationError("no admissible Pauli words to perturb");
  std::normal_distribution<double> normal;
  std::vector<double> dir(admissible.size());
  double norm = 0.0;
  do {
    for (auto& x : dir) x = normal(rng);
    norm = std::sqrt(std::inner_product(dir.begin(), dir.end(), dir.begin(), 0.0));
  } while (norm == 0.0);
  std::map<PauliString, double> out;
  for (std::size_t i = 0; i < admissible.size(); ++i)
    out[admissible[i]] = std::abs(c.channel().coefficient(admissible[i]) + eps * dir[i] / norm);
  return BoundPauliChannel(c.qubits(), PauliChannel(static_cast<int>(k), std::move(out), true));
}

void ErrorModelConfig::validate() const {
  if (!(p_c >= 0.0 && p_c <= 1.0)) throw ValidationError("p_c must lie in [0, 1]");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ValidationError("gamma must be >= 0");
  if (!std::isfinite(gamma_tilde)) throw ValidationError("gamma_tilde must be finite");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ValidationError("epsilon must be >= 0");
  if (!(readout_flip >= 0.0 && readout_flip <= 1.0)) throw ValidationError("readout_flip must lie in [0, 1]");
  if (locality < 1) throw ValidationError("locality bound must be >= 1");
}

nlohmann::json ErrorModelConfig::to_json() const {
  return {{"p_c", p_c},         {"gamma", gamma},       {"gamma_tilde", gamma_tilde}, {"epsilon", epsilon},
          {"readout_flip", readout_flip}, {"locality", locality}, {"seed", seed}};
}

ErrorModelConfig ErrorModelConfig::from_json(const nlohmann::json& j) {
  ErrorModelConfig c;
  try {
    for (const auto& [key, val] : j.items()) {
      if (key == "p_c") c.p_c = val.get<double>();
      else if (key == "gamma") c.gamma = val.get<double>();
      else if (key == "gamma_tilde") c.gamma_tilde = val.get<double>();
      else if (key == "epsilon") c.epsilon = val.get<double>();
      else if (key == "readout_flip") c.readout_flip = val.get<double>();
      else if (key == "locality") c.locality = val.get<int>();
      else if (key == "seed") c.seed = val.get<std::uint64_t>();
      else throw ValidationError("unknown error-model field '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed error model: ") + e.what());
  }
  c.validate();
  return c;
}

NoiseBindings NoiseBindings::noiseless(const Circuit& c) {
  NoiseBindings b;
  b.per_op.resize(c.size());
  b.readout.resize(static_cast<std::size_t>(c.data_width()));
  return b;
}

bool NoiseBindings::empty() const {
  auto none = [](const auto& v) {
    return std::all_of(v.begin(), v.end(), [](const auto& x) { return !x || x->channel().is_identity(); });
  };
  return none(per_op) && none(readout);
}

std::vector<int> op_layers(const Circuit& c) {
  std::vector<int> layers(c.size(), 0);
  std::vector<int> front(static_cast<std::size_t>(c.width()), 0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& op = c[i];
    if (op.layer) {
      layers[i] = *op.layer;
      continue;
    }
    int start = 0;
    const auto qs = op.qubits();
    for (int q : qs) start = std::max(start, front[static_cast<std::size_t>(q)]);
    for (int q : qs) front[static_cast<std::size_t>(q)] = start + 1;
    layers[i] = start;
  }
  return layers;
}

NoiseBindings build_bindings(const Circuit& c, const ErrorModelConfig& cfg) {
  cfg.validate();
  NoiseBindings b = NoiseBindings::noiseless(c);
  const auto layers = op_layers(c);
  int depth = 1;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (!c[i].prep && c[i].is<MatchgateOp>()) depth = std::max(depth, layers[i] + 1);
  const auto gammas = drift_schedule(cfg.gamma, cfg.gamma_tilde, depth);
  auto flip = [&](int q) {
    std::map<PauliString, double> e{{PauliString::parse("I"), 1.0 - cfg.readout_flip},
                                    {PauliString::parse("X"), cfg.readout_flip}};
    return BoundPauliChannel({q}, PauliChannel(1, std::move(e), true));
  };
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& op = c[i];
    if (op.prep) continue;
    std::optional<BoundPauliChannel> ch;
    if (op.is<MatchgateOp>() || op.is<CzOp>() || op.is<SingleQubitOp>()) {
      const auto qs = op.qubits();
      ch = gate_crosstalk(qs, c.width(), cfg.p_c);
      if (op.is<MatchgateOp>() && cfg.gamma > 0.0) {
        const auto& m = op.as<MatchgateOp>();
        const auto gen = m.generator ? *m.generator : m.gate.generator();
        const int l = std::clamp(layers[i], 0, depth - 1);
        ch = compose(*ch, pauli_twirl(overrotation_channel(gen, gammas[static_cast<std::size_t>(l)], m.gate.first())));
      }
      if (cfg.epsilon > 0.0) {
        Rng rng = make_stream(cfg.seed, {0x70657274ULL, i});
        ch = perturb_pauli_channel(*ch, cfg.epsilon, rng);
      }
    } else if (op.is<MeasureOp>() && cfg.readout_flip > 0.0) {
      ch = flip(op.as<MeasureOp>().qubit);
    }
    if (ch && static_cast<int>(ch->qubits().size()) > cfg.locality)
      throw ValidationError("bound channel exceeds the locality bound");
    b.per_op[i] = std::move(ch);
  }
  if (cfg.readout_flip > 0.0)
    for (int q = 0; q < c.data_width(); ++q) b.readout[static_cast<std::size_t>(q)] = flip(q);
  return b;
}

}  // namespace mgv
