#include "mgverify/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>
#include <thread>

#include <Eigen/Core>

#include "mgverify/dense.hpp"
#include "mgverify/gaussian.hpp"
#include "mgverify/haar.hpp"
#include "mgverify/io.hpp"
#include "mgverify/postproc.hpp"
#include "mgverify/rng.hpp"

namespace mgv {

namespace {

constexpr std::uint64_t kTagFig2 = 0x66696732;  // "fig2"
constexpr std::uint64_t kTagDrift = 0x64726674;
constexpr std::uint64_t kTagPerturb = 0x70727462;
constexpr std::uint64_t kTagHaar = 0x68616172;

std::uint64_t key_of(double v) { return std::bit_cast<std::uint64_t>(v); }

/// Runs f(0..count-1) on up to `workers` threads; the first exception is rethrown.
template <class F>
void parallel_for(std::size_t count, unsigned workers, F&& f) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  const auto n_threads = static_cast<std::size_t>(std::min<std::size_t>(workers, count));
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t i; !failed && (i = next++) < count;) {
      try {
        f(i);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

GateGenerator single_term(std::size_t term, double beta) {
  GateGenerator g;
  g.coeffs[term] = beta;
  return g;
}

std::vector<double> fig2_angles(std::uint64_t seed, int count) {
  Rng rng = make_stream(seed);
  std::vector<double> beta(static_cast<std::size_t>(count));
  for (auto& b : beta) b = (uniform01(rng) - 0.5) * std::numbers::pi;
  return beta;
}

void check_fig2_shape(int n, int layers) {
  if (n < 2 || n % 2 != 0) throw ValidationError("fig2 circuit needs an even width >= 2");
  if (layers < 1) throw ValidationError("fig2 circuit needs at least one layer");
}

int fig2_gate_count(int n, int layers) {
  int count = 0;
  for (int l = 0; l < layers; ++l) count += l % 2 == 0 ? n / 2 : n / 2 - 1;
  return count;
}

/// Draws values from a fixed distribution over dense indices.
class TableSampler {
 public:
  TableSampler(const RVector& probs, std::vector<double> values) : values_(std::move(values)) {
    cdf_.resize(static_cast<std::size_t>(probs.size()));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
      acc += std::max(probs(i), 0.0);
      cdf_[static_cast<std::size_t>(i)] = acc;
    }
    if (!(acc > 0.0)) throw SimulationError("distribution has no weight");
  }

  void draw(std::size_t shots, Rng& rng, std::vector<double>& out) const {
    out.resize(shots);
    const double total = cdf_.back();
    for (auto& o : out) {
      const double u = uniform01(rng) * total;
      auto idx = static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
      if (idx >= cdf_.size()) idx = cdf_.size() - 1;
      while (idx > 0 && cdf_[idx] == (idx ? cdf_[idx - 1] : 0.0)) --idx;
      o = values_[idx];
    }
  }

  Sampler sampler() const {
    return [this](std::size_t shots, Rng& rng) {
      std::vector<double> v;
      draw(shots, rng, v);
      return v;
    };
  }

 private:
  std::vector<double> cdf_;
  std::vector<double> values_;
};

std::vector<double> integer_values(int n) {
  const auto perm = identity_permutation(n);
  std::vector<double> v(std::size_t{1} << n);
  for (std::uint64_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(bits_to_int(index_bits(i, n), perm));
  return v;
}

std::vector<double> energy_values(const EnergyMap& em) {
  std::vector<double> v(std::size_t{1} << em.n);
  for (std::uint64_t i = 0; i < v.size(); ++i) v[i] = energy_map(index_bits(i, em.n), em);
  return v;
}

struct Reference {
  Circuit circuit;
  RVector probs;
  std::vector<double> ints;
  std::vector<double> energies;
  CMatrix h_out;
};

Reference make_reference(const ExperimentConfig& cfg, const ErrorModelConfig& model) {
  Reference r{experiment_circuit(cfg), {}, {}, {}, {}};
  r.probs = rc_output_state(r.circuit, build_bindings(r.circuit, model)).diagonal();
  const int n = r.circuit.data_width();
  r.ints = integer_values(n);
  if (cfg.postprocess) {
    const EnergyMap em = energy_coefficients(r.circuit);
    r.energies = energy_values(em);
    r.h_out = energy_operator_dense(em);
  }
  return r;
}

ResultRow compare(const ExperimentConfig& cfg, const Reference& ref, const ErrorModelConfig& alt, Rng rng) {
  const auto t0 = std::chrono::steady_clock::now();
  ResultRow row;
  row.p_c = alt.p_c;
  row.gamma = alt.gamma;
  row.gamma_tilde = alt.gamma_tilde;
  row.epsilon = alt.epsilon;
  const DensityMatrix sigma = rc_output_state(ref.circuit, build_bindings(ref.circuit, alt));
  const RVector q = sigma.diagonal();
  row.distance = diag_distance(ref.probs, q);
  const int n = ref.circuit.data_width();
  row.encoded_weight = n % 2 == 0 ? encoded_subspace_weight(q, n) : std::nan("");

  const TableSampler a(ref.probs, ref.ints), b(q, ref.ints);
  Rng ks_rng(rng()), es_rng(rng()), ksp_rng(rng()), esp_rng(rng());
  row.ks = estimate_power(a.sampler(), b.sampler(), cfg.shots, cfg.alpha, cfg.reps, TestKind::KS, ks_rng);
  row.es = estimate_power(a.sampler(), b.sampler(), cfg.shots, cfg.alpha, cfg.reps, TestKind::ES, es_rng);
  if (cfg.postprocess) {
    row.energy = ref.h_out.cwiseProduct(sigma.matrix().transpose()).sum().real();
    const TableSampler ap(ref.probs, ref.energies), bp(q, ref.energies);
    row.ks_post = estimate_power(ap.sampler(), bp.sampler(), cfg.shots, cfg.alpha, cfg.reps, TestKind::KS, ksp_rng);
    row.es_post = estimate_power(ap.sampler(), bp.sampler(), cfg.shots, cfg.alpha, cfg.reps, TestKind::ES, esp_rng);
  }
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

ErrorModelConfig reference_model(const ExperimentConfig& cfg) {
  ErrorModelConfig m;
  m.p_c = cfg.ref_p_c;
  m.gamma = cfg.ref_gamma;
  m.seed = cfg.seed;
  return m;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

void append_power(std::ostringstream& os, const std::optional<PowerEstimate>& p) {
  if (p) os << ',' << fmt(p->p_hat) << ',' << fmt(p->ci.lo) << ',' << fmt(p->ci.hi);
  else os << ",,,";
}

template <class T>
std::vector<T> json_list(const nlohmann::json& j, const char* key, std::vector<T> fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<std::vector<T>>();
}

}  // namespace

Circuit fig2_circuit(std::uint64_t seed, int n, int layers) {
  check_fig2_shape(n, layers);
  const auto beta = fig2_angles(seed, fig2_gate_count(n, layers));
  Circuit c(n, "fig2");
  std::size_t g = 0;
  for (int l = 0; l < layers; ++l) {
    const bool even = l % 2 == 0;
    for (int q = even ? 0 : 1; q + 1 < n && (even || q + 1 < n - 1); q += 2) {
      const GateGenerator gen = single_term(even ? 0 : 3, beta[g++]);
      c.add_matchgate(Matchgate::from_matrix(gen.unitary(), q), gen, l);
    }
  }
  c.meta()["seed"] = seed;
  return c;
}

Circuit fig2_fswap_variant(const Circuit& c) {
  Circuit out(c.width());
  out.set_data_width(c.data_width());
  out.meta() = c.meta();
  out.meta()["name"] = c.meta().value("name", std::string("circuit")) + "-fswap";
  for (const auto& op : c.ops()) {
    if (op.is<MatchgateOp>()) {
      const auto& mg = op.as<MatchgateOp>();
      const GateGenerator gen = mg.generator ? *mg.generator : mg.gate.generator();
      bool yy = std::abs(gen.coeffs[3]) > 0.0;
      for (std::size_t t = 0; t < gen.coeffs.size(); ++t)
        if (t != 3 && std::abs(gen.coeffs[t]) > 1e-12) yy = false;
      if (yy) {
        CircuitOp swapped = op;
        swapped.op = MatchgateOp{fswap(mg.gate.first()), fswap_generator()};
        out.append(swapped);
        continue;
      }
    }
    out.append(op);
  }
  return out;
}

Circuit fig2_base_circuit(std::uint64_t seed, int n, int layers) {
  check_fig2_shape(n, layers);
  const auto beta = fig2_angles(seed, fig2_gate_count(n, layers));
  const int m = n / 2;
  Circuit c(m, "fig2-base");
  std::size_t g = 0;
  for (int l = 0; l < layers; ++l) {
    if (l % 2 == 0) {
      for (int q = 0; q < m; ++q) {
        const double b = beta[g++];
        Mat2 a;
        a << std::cos(b), cplx(0, std::sin(b)), cplx(0, std::sin(b)), std::cos(b);
        c.add_single(q, a, l);
      }
    } else {
      for (int q = 0; q + 1 < m; ++q) {
        ++g;  // the YY angle has no counterpart once the slot becomes an fSWAP
        c.add_cz(q, q + 1, l);
      }
    }
  }
  return c;
}

void ExperimentConfig::validate() const {
  static const std::vector<std::string> kinds = {"fig2", "fswap", "drift", "perturbation", "haar"};
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
    throw ValidationError("unknown experiment kind: " + kind);
  if (shots < 1 || reps < 1) throw ValidationError("shots and reps must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  if (concat < 1) throw ValidationError("concat must be >= 1");
  if (perturb_draws < 1) throw ValidationError("perturb_draws must be >= 1");
  if ((kind == "fig2" || kind == "fswap") && grid.empty()) throw ValidationError("grid must not be empty");
  if (kind == "drift" && gamma_tilde.empty()) throw ValidationError("drift experiment needs gamma_tilde values");
  if (kind == "perturbation" && epsilon.empty()) throw ValidationError("perturbation experiment needs epsilon values");
  if (kind == "haar" && (haar_qubits.empty() || haar_shots.empty() || haar_alphas.empty() || haar_tests.empty()))
    throw ValidationError("haar experiment needs qubits, shots, alphas and tests");
  for (const auto& g : grid)
    if (g.p_c < 0 || g.p_c > 1 || g.gamma < 0) throw ValidationError("grid point out of range");
  for (double e : epsilon)
    if (e < 0 || e > 1) throw ValidationError("epsilon must lie in [0, 1]");
  for (double a : haar_alphas)
    if (!(a > 0.0 && a < 1.0)) throw ValidationError("haar alpha must lie in (0, 1)");
  for (int n : haar_qubits)
    if (n < 1 || n > kMaxDenseQubits) throw ValidationError("haar qubit count out of range");
  for (const auto& t : haar_tests) test_kind_from_string(t);
  if (haar_pairs < 1 || haar_reps < 1) throw ValidationError("haar pairs and reps must be positive");
  reference_model(*this).validate();
}

std::vector<GridPoint> ExperimentConfig::default_grid() {
  std::vector<GridPoint> g;
  for (double p : {0.0, 2.5e-3, 5e-3, 1e-2, 2e-2, 4e-2, 8e-2})
    for (double gm : {0.0, 0.05, 0.2, 0.5, 1.0}) g.push_back({p, gm});
  return g;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["circuit"] = circuit;
  j["ref_p_c"] = ref_p_c;
  j["ref_gamma"] = ref_gamma;
  j["grid"] = nlohmann::json::array();
  for (const auto& g : grid) j["grid"].push_back({g.p_c, g.gamma});
  j["gamma_tilde"] = gamma_tilde;
  j["epsilon"] = epsilon;
  j["perturb_draws"] = perturb_draws;
  j["shots"] = shots;
  j["alpha"] = alpha;
  j["reps"] = reps;
  j["seed"] = seed;
  j["postprocess"] = postprocess;
  j["concat"] = concat;
  j["out_dir"] = out_dir;
  j["workers"] = workers;
  j["haar_qubits"] = haar_qubits;
  j["haar_shots"] = haar_shots;
  j["haar_alphas"] = haar_alphas;
  j["haar_pairs"] = haar_pairs;
  j["haar_reps"] = haar_reps;
  j["haar_calibration_pairs"] = haar_calibration_pairs;
  j["haar_tests"] = haar_tests;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    if (!j.is_object()) throw ValidationError("experiment config must be a JSON object");
    c.kind = j.value("kind", c.kind);
    c.circuit = j.value("circuit", c.kind == "fswap" ? std::string("builtin:fswap") : c.circuit);
    c.ref_p_c = j.value("ref_p_c", c.ref_p_c);
    c.ref_gamma = j.value("ref_gamma", c.ref_gamma);
    if (j.contains("grid")) {
      c.grid.clear();
      const auto& g = j.at("grid");
      if (g.is_object()) {
        for (double p : g.at("p_c").get<std::vector<double>>())
          for (double gm : g.at("gamma").get<std::vector<double>>()) c.grid.push_back({p, gm});
      } else {
        for (const auto& pt : g) c.grid.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
      }
    }
    c.gamma_tilde = json_list<double>(j, "gamma_tilde", {});
    c.epsilon = json_list<double>(j, "epsilon", {});
    c.perturb_draws = j.value("perturb_draws", c.perturb_draws);
    c.shots = j.value("shots", c.shots);
    c.alpha = j.value("alpha", c.alpha);
    c.reps = j.value("reps", c.reps);
    c.seed = j.value("seed", c.seed);
    c.postprocess = j.value("postprocess", c.postprocess);
    c.concat = j.value("concat", c.concat);
    c.out_dir = j.value("out_dir", c.out_dir);
    c.workers = j.value("workers", c.workers);
    c.haar_qubits = json_list<int>(j, "haar_qubits", c.haar_qubits);
    c.haar_shots = json_list<std::size_t>(j, "haar_shots", c.haar_shots);
    c.haar_alphas = json_list<double>(j, "haar_alphas", c.haar_alphas);
    c.haar_pairs = j.value("haar_pairs", c.haar_pairs);
    c.haar_reps = j.value("haar_reps", c.haar_reps);
    c.haar_calibration_pairs = j.value("haar_calibration_pairs", c.haar_calibration_pairs);
    c.haar_tests = json_list<std::string>(j, "haar_tests", c.haar_tests);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

Circuit experiment_circuit(const ExperimentConfig& cfg) {
  Circuit c;
  if (cfg.circuit == "builtin:fig2") c = fig2_circuit(0);
  else if (cfg.circuit == "builtin:fswap") c = fig2_fswap_variant(fig2_circuit(0));
  else c = load_circuit(cfg.circuit);
  if (cfg.kind == "fswap" && cfg.circuit != "builtin:fswap") c = fig2_fswap_variant(c);
  if (c.data_width() > kMaxDenseQubits) throw ValidationError("experiment circuit too wide for the density-matrix engine");
  return cfg.concat > 1 ? c.concatenated(cfg.concat) : c;
}

std::vector<ResultRow> run_fig2_grid(const ExperimentConfig& cfg) {
  const ErrorModelConfig ref_model = reference_model(cfg);
  const Reference ref = make_reference(cfg, ref_model);
  std::vector<ResultRow> rows(cfg.grid.size());
  parallel_for(rows.size(), cfg.workers, [&](std::size_t i) {
    const GridPoint& g = cfg.grid[i];
    ErrorModelConfig alt = ref_model;
    alt.p_c = g.p_c;
    alt.gamma = g.gamma;
    rows[i] = compare(cfg, ref, alt, make_stream(cfg.seed, {kTagFig2, key_of(g.p_c), key_of(g.gamma)}));
    rows[i].experiment = cfg.kind;
    rows[i].label = "p_c=" + fmt(g.p_c) + ";gamma=" + fmt(g.gamma);
  });
  return rows;
}

std::vector<ResultRow> run_drift_experiment(const ExperimentConfig& cfg) {
  const ErrorModelConfig ref_model = reference_model(cfg);
  const Reference ref = make_reference(cfg, ref_model);
  std::vector<ResultRow> rows(cfg.gamma_tilde.size());
  parallel_for(rows.size(), cfg.workers, [&](std::size_t i) {
    const double gt = cfg.gamma_tilde[i];
    ErrorModelConfig alt = ref_model;
    alt.gamma_tilde = gt;
    rows[i] = compare(cfg, ref, alt, make_stream(cfg.seed, {kTagDrift, key_of(gt)}));
    rows[i].experiment = "drift";
    rows[i].label = "gamma_tilde=" + fmt(gt);
  });
  return rows;
}

std::vector<ResultRow> run_perturbation_experiment(const ExperimentConfig& cfg) {
  const ErrorModelConfig ref_model = reference_model(cfg);
  const Reference ref = make_reference(cfg, ref_model);
  const auto draws = static_cast<std::size_t>(cfg.perturb_draws);
  std::vector<ResultRow> rows(cfg.epsilon.size() * draws);
  parallel_for(rows.size(), cfg.workers, [&](std::size_t i) {
    const double eps = cfg.epsilon[i / draws];
    const std::uint64_t d = i % draws;
    ErrorModelConfig alt = ref_model;
    alt.epsilon = eps;
    alt.seed = make_stream(cfg.seed, {kTagPerturb, key_of(eps), d})();
    rows[i] = compare(cfg, ref, alt, make_stream(cfg.seed, {kTagPerturb, key_of(eps), d, 1}));
    rows[i].experiment = "perturbation";
    rows[i].label = "epsilon=" + fmt(eps) + ";draw=" + std::to_string(d);
  });
  return rows;
}

std::vector<HaarRow> run_haar_experiment(const ExperimentConfig& cfg) {
  std::vector<HaarRow> rows;
  for (const auto& test_name : cfg.haar_tests) {
    const TestKind kind = test_kind_from_string(test_name);
    for (int n : cfg.haar_qubits) {
      const auto values = integer_values(n);
      for (int fam = 0; fam < 2; ++fam) {
        const bool mg = fam == 0;
        const std::string family = mg ? "mg-haar" : "haar";
        auto draw_probs = [&](Rng& rng) {
          RVector p = RVector::Zero(Eigen::Index{1} << n);
          if (mg) {
            for (const auto& [idx, pr] : exact_distribution(mg_haar_state(n, rng), n))
              p(static_cast<Eigen::Index>(idx)) = pr;
          } else {
            p = haar_state(n, rng).probabilities();
          }
          return p;
        };
        const std::size_t nm = cfg.haar_shots.size(), na = cfg.haar_alphas.size();
        // Per pair and (M, alpha): distinct pairs record 1 on success, identical
        // pairs record their rejection count.
        auto run_pair = [&](const TableSampler& a, const TableSampler& b, Rng& rng, bool identical, std::size_t* out) {
          std::vector<double> xs, ys;
          for (std::size_t mi = 0; mi < nm; ++mi) {
            std::vector<std::size_t> keeps(na, 0);
            for (std::size_t r = 0; r < cfg.haar_reps; ++r) {
              a.draw(cfg.haar_shots[mi], rng, xs);
              b.draw(cfg.haar_shots[mi], rng, ys);
              const double p = run_test(kind, xs, ys, 0.5).p_value;
              for (std::size_t ai = 0; ai < na; ++ai)
                if (!(p < cfg.haar_alphas[ai])) ++keeps[ai];
            }
            for (std::size_t ai = 0; ai < na; ++ai) {
              if (identical) {
                out[mi * na + ai] = cfg.haar_reps - keeps[ai];
              } else {
                const double p_hat = static_cast<double>(keeps[ai]) / static_cast<double>(cfg.haar_reps);
                out[mi * na + ai] = distinguish_success(p_hat, cfg.haar_alphas[ai]) ? 1 : 0;
              }
            }
          }
        };
        const std::size_t cells = nm * na;
        std::vector<std::size_t> pair_counts(cfg.haar_pairs * cells), cal_counts(cfg.haar_calibration_pairs * cells);
        parallel_for(cfg.haar_pairs, cfg.workers, [&](std::size_t k) {
          Rng rng = make_stream(cfg.seed, {kTagHaar, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(fam), k});
          const TableSampler a(draw_probs(rng), values), b(draw_probs(rng), values);
          run_pair(a, b, rng, false, &pair_counts[k * cells]);
        });
        parallel_for(cfg.haar_calibration_pairs, cfg.workers, [&](std::size_t k) {
          Rng rng = make_stream(cfg.seed, {kTagHaar, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(fam), k, 1});
          const TableSampler a(draw_probs(rng), values);
          run_pair(a, a, rng, true, &cal_counts[k * cells]);
        });
        std::vector<std::size_t> successes(cells, 0), rejections(cells, 0);
        for (std::size_t k = 0; k < cfg.haar_pairs; ++k)
          for (std::size_t c = 0; c < cells; ++c) successes[c] += pair_counts[k * cells + c];
        for (std::size_t k = 0; k < cfg.haar_calibration_pairs; ++k)
          for (std::size_t c = 0; c < cells; ++c) rejections[c] += cal_counts[k * cells + c];
        for (std::size_t mi = 0; mi < nm; ++mi)
          for (std::size_t ai = 0; ai < na; ++ai) {
            HaarRow row{family, test_name, n, cfg.haar_shots[mi], cfg.haar_alphas[ai], cfg.haar_pairs, 0.0, {}};
            const std::size_t s = successes[mi * na + ai];
            row.ratio = static_cast<double>(s) / static_cast<double>(cfg.haar_pairs);
            row.ci = wilson_interval(s, cfg.haar_pairs);
            rows.push_back(row);
            if (cfg.haar_calibration_pairs > 0) {
              const std::size_t trials = cfg.haar_calibration_pairs * cfg.haar_reps;
              const std::size_t rej = rejections[mi * na + ai];
              HaarRow cal{family + "-identical", test_name, n, cfg.haar_shots[mi], cfg.haar_alphas[ai],
                          cfg.haar_calibration_pairs, static_cast<double>(rej) / static_cast<double>(trials),
                          wilson_interval(rej, trials)};
              rows.push_back(cal);
            }
          }
      }
    }
  }
  return rows;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << "experiment,label,p_c,gamma,gamma_tilde,epsilon,distance,encoded_weight,"
        "ks_keep,ks_lo,ks_hi,es_keep,es_lo,es_hi,ks_post_keep,ks_post_lo,ks_post_hi,es_post_keep,es_post_lo,es_post_hi,energy,reps\n";
  for (const auto& r : rows) {
    os << r.experiment << ',' << r.label << ',' << fmt(r.p_c) << ',' << fmt(r.gamma) << ',' << fmt(r.gamma_tilde) << ','
       << fmt(r.epsilon) << ',' << fmt(r.distance) << ',' << fmt(r.encoded_weight);
    append_power(os, r.ks);
    append_power(os, r.es);
    append_power(os, r.ks_post);
    append_power(os, r.es_post);
    os << ',' << (r.energy ? fmt(*r.energy) : "") << ',' << r.ks.reps << '\n';
  }
  return os.str();
}

std::string haar_csv(const std::vector<HaarRow>& rows) {
  std::ostringstream os;
  os << "family,test,n,shots,alpha,pairs,ratio,ci_lo,ci_hi\n";
  for (const auto& r : rows)
    os << r.family << ',' << r.test << ',' << r.n << ',' << r.shots << ',' << fmt(r.alpha) << ',' << r.pairs << ','
       << fmt(r.ratio) << ',' << fmt(r.ci.lo) << ',' << fmt(r.ci.hi) << '\n';
  return os.str();
}

std::string plot_csv(const std::vector<ResultRow>& rows) {
  std::vector<const ResultRow*> sorted;
  for (const auto& r : rows) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->distance < b->distance; });
  std::ostringstream os;
  os << "distance,ks_keep,es_keep,ks_post_keep,es_post_keep\n";
  for (const auto* r : sorted) {
    os << fmt(r->distance) << ',' << fmt(r->ks.p_hat) << ',' << fmt(r->es.p_hat) << ','
       << (r->ks_post ? fmt(r->ks_post->p_hat) : "") << ',' << (r->es_post ? fmt(r->es_post->p_hat) : "") << '\n';
  }
  return os.str();
}

nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config, std::uint64_t seed) {
  nlohmann::json m;
  m["tool"] = "mgverify";
  m["version"] = library_version();
  m["command"] = command;
  m["config"] = config;
  m["config_sha256"] = sha256_hex(config.dump());
  m["seed"] = seed;
  m["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                       std::to_string(EIGEN_MINOR_VERSION);
  m["nlohmann_json_version"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                               std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                               std::to_string(NLOHMANN_JSON_VERSION_PATCH);
#if defined(__VERSION__)
  m["compiler"] = __VERSION__;
#endif
  return m;
}

nlohmann::json run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(fs::path(cfg.out_dir) / "plotdata");
  nlohmann::json manifest = make_manifest("experiment " + cfg.kind, cfg.to_json(), cfg.seed);
  nlohmann::json timing = nlohmann::json::object();
  std::vector<std::string> outputs;
  if (cfg.kind == "haar") {
    const auto rows = run_haar_experiment(cfg);
    write_file((fs::path(cfg.out_dir) / "results.csv").string(), haar_csv(rows));
    write_file((fs::path(cfg.out_dir) / "plotdata" / "haar.csv").string(), haar_csv(rows));
    outputs.push_back("results.csv");
    outputs.push_back("plotdata/haar.csv");
  } else {
    std::vector<ResultRow> rows;
    if (cfg.kind == "fig2" || cfg.kind == "fswap") rows = run_fig2_grid(cfg);
    else if (cfg.kind == "drift") rows = run_drift_experiment(cfg);
    else rows = run_perturbation_experiment(cfg);
    write_file((fs::path(cfg.out_dir) / "results.csv").string(), results_csv(rows));
    write_file((fs::path(cfg.out_dir) / "plotdata" / (cfg.kind + ".csv")).string(), plot_csv(rows));
    outputs.push_back("results.csv");
    outputs.push_back("plotdata/" + cfg.kind + ".csv");
    for (const auto& r : rows) timing[r.label] = r.seconds;
  }
  if (cfg.circuit.rfind("builtin:", 0) != 0 && cfg.kind != "haar")
    manifest["inputs"] = {{cfg.circuit, sha256_hex(read_file(cfg.circuit))}};
  manifest["outputs"] = nlohmann::json::object();
  for (const auto& o : outputs) manifest["outputs"][o] = sha256_hex(read_file((fs::path(cfg.out_dir) / o).string()));
  timing["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest["timing_seconds"] = timing;
  write_json((fs::path(cfg.out_dir) / "manifest.json").string(), manifest);
  return manifest;
}

}  // namespace mgv
