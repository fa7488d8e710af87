#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgverify/circuit.hpp"
#include "mgverify/noise.hpp"
#include "mgverify/stats.hpp"

namespace mgv {

/// Brickwork of exp(i beta XX) layers on (0,1), (2,3), ... alternating with
/// exp(i beta YY) layers on (1,2), (3,4), ...; beta ~ U[-pi/2, pi/2].
Circuit fig2_circuit(std::uint64_t seed = 0, int n = 10, int layers = 9);

/// Every YY gate of a fig2-style circuit replaced by an fSWAP.
Circuit fig2_fswap_variant(const Circuit& c);

/// Base circuit on n/2 qubits whose encoding, after CZ -> fSWAP, is the
/// fSWAP variant of fig2_circuit(seed, n, layers).
Circuit fig2_base_circuit(std::uint64_t seed = 0, int n = 10, int layers = 9);

struct GridPoint {
  double p_c = 0.0;
  double gamma = 0.0;
};

struct ExperimentConfig {
  std::string kind = "fig2";  ///< fig2 | fswap | drift | perturbation | haar
  std::string circuit = "builtin:fig2";
  double ref_p_c = 5e-3;
  double ref_gamma = 0.05;
  std::vector<GridPoint> grid = default_grid();
  std::vector<double> gamma_tilde;  ///< drift endpoints
  std::vector<double> epsilon;      ///< perturbation radii
  int perturb_draws = 1;
  std::size_t shots = 400;
  double alpha = 0.05;
  std::size_t reps = 1000;
  std::uint64_t seed = 0;
  bool postprocess = false;
  int concat = 1;
  std::string out_dir = ".";
  /// Worker threads for grid points and Haar pairs; 0 = hardware concurrency.
  /// Results do not depend on it.
  unsigned workers = 0;

  std::vector<int> haar_qubits = {7, 8, 9, 10};
  std::vector<std::size_t> haar_shots = {50, 100, 200, 400};
  std::vector<double> haar_alphas = {0.1, 0.05, 0.01};
  std::size_t haar_pairs = 2000;
  std::size_t haar_reps = 100;
  std::size_t haar_calibration_pairs = 200;
  std::vector<std::string> haar_tests = {"ks"};

  void validate() const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  /// The grid used by default for fig2-type experiments.
  static std::vector<GridPoint> default_grid();
};

struct ResultRow {
  std::string experiment;
  std::string label;
  double p_c = 0.0;
  double gamma = 0.0;
  double gamma_tilde = 1.0;
  double epsilon = 0.0;
  double distance = 0.0;
  PowerEstimate ks;
  PowerEstimate es;
  std::optional<PowerEstimate> ks_post;
  std::optional<PowerEstimate> es_post;
  double encoded_weight = 0.0;
  /// tr(H_out sigma), with postprocessing only.
  std::optional<double> energy;
  double seconds = 0.0;  ///< wall clock; reported in the manifest only
};

/// Resolves cfg.circuit ("builtin:fig2", "builtin:fswap" or a JSON path)
/// and applies the concatenation factor.
Circuit experiment_circuit(const ExperimentConfig& cfg);

std::vector<ResultRow> run_fig2_grid(const ExperimentConfig& cfg);
std::vector<ResultRow> run_drift_experiment(const ExperimentConfig& cfg);
std::vector<ResultRow> run_perturbation_experiment(const ExperimentConfig& cfg);

struct HaarRow {
  std::string family;  ///< mg-haar | haar | mg-haar-identical | haar-identical
  std::string test;
  int n = 0;
  std::size_t shots = 0;
  double alpha = 0.0;
  std::size_t pairs = 0;
  /// Distinct pairs: pairs with p_hat(T=1) <= alpha. Identical pairs: mean rejection rate.
  double ratio = 0.0;
  Interval ci;
};

std::vector<HaarRow> run_haar_experiment(const ExperimentConfig& cfg);

std::string results_csv(const std::vector<ResultRow>& rows);
std::string haar_csv(const std::vector<HaarRow>& rows);
/// Distance vs keep-probability per test, for plotting.
std::string plot_csv(const std::vector<ResultRow>& rows);

/// Runs cfg.kind and writes results.csv, plotdata/ and manifest.json into
/// cfg.out_dir. Returns the manifest.
nlohmann::json run_experiment(const ExperimentConfig& cfg);

/// Manifest common fields: tool version, seed, config hash.
nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config, std::uint64_t seed);

}  // namespace mgv
