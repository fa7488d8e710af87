#include "cli.hpp"

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mgverify/dense.hpp"
#include "mgverify/encoding.hpp"
#include "mgverify/experiments.hpp"
#include "mgverify/gaussian.hpp"
#include "mgverify/io.hpp"
#include "mgverify/noise.hpp"
#include "mgverify/postproc.hpp"
#include "mgverify/stats.hpp"

namespace mgv::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Manifest for single-output commands, written to <out>.manifest.json.
void write_manifest(const std::string& command, const json& config, std::uint64_t seed,
                    const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
  json m = make_manifest(command, config, seed);
  m["inputs"] = json::object();
  for (const auto& in : inputs) m["inputs"][in] = sha256_hex(read_file(in));
  m["outputs"] = json::object();
  for (const auto& out : outputs) m["outputs"][out] = sha256_hex(read_file(out));
  write_json(outputs.front() + ".manifest.json", m);
}

bool is_gaussian_compatible(const Circuit& c) {
  for (const auto& op : c.ops())
    if (op.is<CzOp>() || op.is<SingleQubitOp>()) return false;
  return true;
}

ErrorModelConfig noiseless_model() {
  ErrorModelConfig m;
  m.p_c = 0.0;
  m.gamma = 0.0;
  return m;
}

ErrorModelConfig load_noise(const std::string& path) {
  return path.empty() ? noiseless_model() : ErrorModelConfig::from_json(read_json(path));
}

CMatrix parse_matrix(const json& j) {
  if (!j.is_array() || j.empty()) throw ValidationError("Kraus operator must be a nonempty array of rows");
  const auto dim = static_cast<Eigen::Index>(j.size());
  CMatrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) throw ValidationError("Kraus operator must be square");
    for (Eigen::Index c = 0; c < dim; ++c) {
      const auto& z = row.at(static_cast<std::size_t>(c));
      m(r, c) = z.is_array() ? cplx(z.at(0).get<double>(), z.at(1).get<double>()) : cplx(z.get<double>(), 0.0);
    }
  }
  return m;
}

/// {"targets": [..], "kraus": [K1, K2, ...]} with entries [re, im] or real numbers.
LocalChannel load_local_channel(const std::string& path) {
  const json j = read_json(path);
  try {
    LocalChannel e;
    e.targets = j.at("targets").get<std::vector<int>>();
    for (const auto& k : j.at("kraus")) e.kraus.push_back(parse_matrix(k));
    const Eigen::Index dim = Eigen::Index{1} << e.targets.size();
    for (const auto& k : e.kraus)
      if (k.rows() != dim) throw ValidationError("Kraus operator size does not match the targets");
    if (!e.is_cptp()) throw ValidationError("Kraus operators are not trace preserving");
    return e;
  } catch (const json::exception& ex) {
    throw ValidationError("malformed channel file " + path + ": " + ex.what());
  }
}

json bound_channel_json(const BoundPauliChannel& c) { return {{"qubits", c.qubits()}, {"channel", c.channel().to_json()}}; }

/// A file of equal-length bitstrings is mapped through the permutation; any
/// other file is read as one number per line.
std::vector<double> load_test_values(const std::string& path, const std::string& map) {
  try {
    const auto xs = read_bitstrings(path);
    if (xs.empty()) throw ValidationError("no samples in " + path);
    const auto perm = parse_permutation(map, static_cast<int>(xs.front().size()));
    return map_bitstrings(xs, perm);
  } catch (const ValidationError&) {
    if (map != "perm:identity") throw;
  }
  return read_values(path);
}

// Subcommand bodies.

struct EncodeArgs {
  std::string in, out, mode = "fswap";
  int max_registers = 8;
};

int run_encode(const EncodeArgs& a) {
  const EncodedCircuit enc = encode_universal(load_circuit(a.in));
  Circuit out;
  if (a.mode == "universal") {
    out = enc.encoded;
  } else if (a.mode == "fswap") {
    out = replace_cz_with_fswap(enc.encoded);
    for (const auto& op : out.ops())
      if (op.is<MatchgateOp>() && !is_matchgate(op.as<MatchgateOp>().gate.matrix()))
        throw SimulationError("encoded circuit contains a non-matchgate");
  } else {
    out = gadgetize(enc.encoded, magic_kind_from_string(a.mode), a.max_registers).circuit;
  }
  save_circuit(out, a.out);
  write_manifest("encode", {{"in", a.in}, {"mode", a.mode}, {"max_registers", a.max_registers}}, 0, {a.in}, {a.out});
  std::cout << "encoded " << out.data_width() << " data qubits, " << out.width() << " lines, " << out.gate_count()
            << " gates -> " << a.out << '\n';
  return 0;
}

struct SampleArgs {
  std::string circuit, noise, out, engine = "auto";
  std::size_t shots = 1000;
  std::uint64_t seed = 0;
};

int run_sample(const SampleArgs& a) {
  const Circuit c = load_circuit(a.circuit);
  ErrorModelConfig model = load_noise(a.noise);
  const NoiseBindings b = build_bindings(c, model);
  std::string engine = a.engine;
  if (engine == "auto") engine = is_gaussian_compatible(c) ? "weak" : "dense";
  Rng rng = make_stream(a.seed);
  std::vector<Bitstring> xs;
  if (engine == "weak") {
    xs = WeakSampler(c, b).sample(a.shots, rng);
  } else {
    if (c.width() > kMaxDenseQubits) throw ValidationError("circuit too wide for the dense engine");
    xs = sample_bitstrings(rc_output_state(c, b).diagonal(), c.data_width(), a.shots, rng);
  }
  write_bitstrings(a.out, xs);
  std::vector<std::string> inputs = {a.circuit};
  if (!a.noise.empty()) inputs.push_back(a.noise);
  write_manifest("sample",
                 {{"circuit", a.circuit}, {"noise", model.to_json()}, {"shots", a.shots}, {"engine", engine}}, a.seed,
                 inputs, {a.out});
  std::cout << "wrote " << xs.size() << " samples (" << engine << " engine) -> " << a.out << '\n';
  return 0;
}

struct TwirlArgs {
  std::string circuit, noise, kraus, out;
};

int run_twirl(const TwirlArgs& a) {
  json result;
  std::vector<std::string> inputs;
  if (!a.kraus.empty()) {
    if (!a.circuit.empty()) throw ValidationError("--kraus and --circuit are mutually exclusive");
    result = bound_channel_json(pauli_twirl(load_local_channel(a.kraus)));
    inputs.push_back(a.kraus);
  } else {
    if (a.circuit.empty()) throw ValidationError("twirl needs --circuit or --kraus");
    const Circuit c = load_circuit(a.circuit);
    const NoiseBindings b = build_bindings(c, load_noise(a.noise));
    result = {{"ops", json::array()}, {"readout", json::array()}};
    for (std::size_t i = 0; i < b.per_op.size(); ++i)
      if (b.per_op[i]) result["ops"].push_back({{"op", i}, {"binding", bound_channel_json(*b.per_op[i])}});
    for (std::size_t q = 0; q < b.readout.size(); ++q)
      if (b.readout[q]) result["readout"].push_back({{"qubit", q}, {"binding", bound_channel_json(*b.readout[q])}});
    inputs.push_back(a.circuit);
    if (!a.noise.empty()) inputs.push_back(a.noise);
  }
  write_json(a.out, result);
  write_manifest("twirl", {{"circuit", a.circuit}, {"noise", a.noise}, {"kraus", a.kraus}}, 0, inputs, {a.out});
  std::cout << "wrote twirled channels -> " << a.out << '\n';
  return 0;
}

struct TestArgs {
  std::string a, b, test = "both", map = "perm:identity", out;
  double alpha = 0.05;
};

int run_test_cmd(const TestArgs& t) {
  const auto xs = load_test_values(t.a, t.map);
  const auto ys = load_test_values(t.b, t.map);
  std::vector<TestKind> kinds;
  if (t.test == "both") kinds = {TestKind::KS, TestKind::ES};
  else kinds = {test_kind_from_string(t.test)};
  json result = {{"a", t.a}, {"b", t.b}, {"map", t.map}, {"alpha", t.alpha}, {"tests", json::array()}};
  result["inputs"] = {{t.a, sha256_hex(read_file(t.a))}, {t.b, sha256_hex(read_file(t.b))}};
  for (TestKind k : kinds) {
    const TestOutcome o = run_test(k, xs, ys, t.alpha);
    result["tests"].push_back(o.to_json());
    std::cout << o.test << ": statistic " << o.statistic << ", p-value " << o.p_value << " -> "
              << (o.reject ? "reject" : "keep") << '\n';
  }
  if (!t.out.empty()) {
    write_json(t.out, result);
    write_manifest("test", {{"test", t.test}, {"alpha", t.alpha}, {"map", t.map}}, 0, {t.a, t.b}, {t.out});
  }
  return 0;
}

struct PostprocessArgs {
  std::string circuit, in, out;
};

int run_postprocess(const PostprocessArgs& a) {
  const EnergyMap em = energy_coefficients(load_circuit(a.circuit));
  const auto xs = read_bitstrings(a.in);
  const SampleSet s = postprocess_samples(xs, em);
  std::ostringstream os;
  os << std::setprecision(17);
  for (double v : s.values) os << v << '\n';
  write_file(a.out, os.str());
  write_manifest("postprocess", {{"circuit", a.circuit}, {"in", a.in}}, 0, {a.circuit, a.in}, {a.out});
  std::cout << "wrote " << s.values.size() << " energies -> " << a.out << '\n';
  return 0;
}

struct ExperimentArgs {
  std::string kind, config, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> concat;
  std::optional<std::size_t> reps, shots;
  bool postprocess = false;
};

int run_experiment_cmd(const ExperimentArgs& a) {
  json j = a.config.empty() ? json::object() : read_json(a.config);
  if (!a.kind.empty()) {
    if (j.contains("kind") && j["kind"] != a.kind)
      throw ValidationError("experiment kind '" + a.kind + "' disagrees with the config");
    j["kind"] = a.kind;
  }
  if (!a.out_dir.empty()) j["out_dir"] = a.out_dir;
  if (a.seed) j["seed"] = *a.seed;
  if (a.concat) j["concat"] = *a.concat;
  if (a.reps) j["reps"] = *a.reps;
  if (a.shots) j["shots"] = *a.shots;
  if (a.postprocess) j["postprocess"] = true;
  const ExperimentConfig cfg = ExperimentConfig::from_json(j);
  const json manifest = run_experiment(cfg);
  std::cout << "experiment " << cfg.kind << " done in " << manifest["timing_seconds"]["total"].get<double>()
            << " s -> " << (fs::path(cfg.out_dir) / "results.csv").string() << '\n';
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Matchgate-circuit verification toolkit", "mgverify"};
  app.set_version_flag("--version", library_version());
  app.require_subcommand(1);

  EncodeArgs enc;
  auto* encode = app.add_subcommand("encode", "Encode a single-qubit + CZ circuit into matchgates");
  encode->add_option("--in", enc.in, "base circuit JSON")->required()->check(CLI::ExistingFile);
  encode->add_option("--out", enc.out, "output circuit JSON")->required();
  encode->add_option("--mode", enc.mode, "fswap | universal | gadget-m | gadget-mprime")
      ->check(CLI::IsMember({"fswap", "universal", "gadget-m", "gadget-mprime"}));
  encode->add_option("--max-registers", enc.max_registers, "magic registers available to gadgets");

  SampleArgs smp;
  auto* sample = app.add_subcommand("sample", "Draw bitstrings from the randomly compiled noisy output");
  sample->add_option("--circuit", smp.circuit)->required()->check(CLI::ExistingFile);
  sample->add_option("--noise", smp.noise, "error-model JSON (noiseless when omitted)")->check(CLI::ExistingFile);
  sample->add_option("--shots", smp.shots)->check(CLI::PositiveNumber);
  sample->add_option("--seed", smp.seed);
  sample->add_option("--engine", smp.engine, "auto | weak | dense")->check(CLI::IsMember({"auto", "weak", "dense"}));
  sample->add_option("--out", smp.out)->required();

  TwirlArgs tw;
  auto* twirl = app.add_subcommand("twirl", "Pauli-twirl an error model or a Kraus channel");
  twirl->add_option("--circuit", tw.circuit)->check(CLI::ExistingFile);
  twirl->add_option("--noise", tw.noise)->check(CLI::ExistingFile);
  twirl->add_option("--kraus", tw.kraus, "{\"targets\": [...], \"kraus\": [...]}")->check(CLI::ExistingFile);
  twirl->add_option("--out", tw.out)->required();

  TestArgs ta;
  auto* test = app.add_subcommand("test", "Two-sample KS / ES test on sample files");
  test->add_option("--a", ta.a)->required()->check(CLI::ExistingFile);
  test->add_option("--b", ta.b)->required()->check(CLI::ExistingFile);
  test->add_option("--test", ta.test)->check(CLI::IsMember({"ks", "es", "both"}));
  test->add_option("--alpha", ta.alpha)->check(CLI::Range(0.0, 1.0));
  test->add_option("--map", ta.map, "perm:identity | perm:reverse | perm:i0,i1,...");
  test->add_option("--out", ta.out);

  PostprocessArgs pp;
  auto* post = app.add_subcommand("postprocess", "Map samples to energies f(x) = <x|H_out|x>");
  post->add_option("--circuit", pp.circuit)->required()->check(CLI::ExistingFile);
  post->add_option("--in", pp.in)->required()->check(CLI::ExistingFile);
  post->add_option("--out", pp.out)->required();

  ExperimentArgs ex;
  auto* experiment = app.add_subcommand("experiment", "Run an experiment driver");
  experiment->add_option("kind", ex.kind, "fig2 | fswap | drift | perturbation | haar")
      ->check(CLI::IsMember({"fig2", "fswap", "drift", "perturbation", "haar"}));
  experiment->add_option("--config", ex.config)->check(CLI::ExistingFile);
  experiment->add_option("--out-dir", ex.out_dir);
  experiment->add_option("--seed", ex.seed);
  experiment->add_option("--concat", ex.concat)->check(CLI::PositiveNumber);
  experiment->add_option("--reps", ex.reps)->check(CLI::PositiveNumber);
  experiment->add_option("--shots", ex.shots)->check(CLI::PositiveNumber);
  experiment->add_flag("--postprocess", ex.postprocess);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*encode) return run_encode(enc);
    if (*sample) return run_sample(smp);
    if (*twirl) return run_twirl(tw);
    if (*test) return run_test_cmd(ta);
    if (*post) return run_postprocess(pp);
    return run_experiment_cmd(ex);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace mgv::cli
