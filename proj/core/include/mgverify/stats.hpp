#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgverify/dense.hpp"
#include "mgverify/rng.hpp"

namespace mgv {

enum class Provenance { Quantum, Classical, Postprocessed };

struct SampleSet {
  std::vector<double> values;
  Provenance provenance = Provenance::Classical;
};

struct TestOutcome {
  std::string test;
  double statistic = 0.0;
  double p_value = 1.0;
  double alpha = 0.05;
  bool reject = false;  ///< p_value < alpha
  std::size_t k = 0;
  std::size_t l = 0;
  int dof = 0;  ///< ES only: rank of the covariance estimate

  nlohmann::json to_json() const;
};

/// sum_{i=1}^{n} 2^i x[perm[i-1]] (perm is 0-based). n <= 62.
std::uint64_t bits_to_int(const Bitstring& x, std::span<const int> perm);
std::vector<int> identity_permutation(int n);
/// "perm:identity", "perm:reverse" or "perm:2,0,1".
std::vector<int> parse_permutation(const std::string& spec, int n);
std::vector<double> map_bitstrings(const std::vector<Bitstring>& xs, std::span<const int> perm);

/// sup_x |F_1(x) - F_2(x)| evaluated at the pooled jump points.
double ks_statistic(std::span<const double> xs, std::span<const double> ys);
/// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_sf(double lambda);
TestOutcome ks_two_sample(std::span<const double> xs, std::span<const double> ys, double alpha = 0.05);

/// (x_{floor(3k/4)} - x_{floor(k/4)}) / 2 on the sorted sample, 1-based.
double semi_interquartile_range(std::span<const double> pooled);

/// Thrown by es_two_sample when the pooled semi-interquartile range is zero.
class DegenerateSampleError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Epps-Singleton test at t = (0.4, 0.8) / sigma~ unless `t` is given.
TestOutcome es_two_sample(std::span<const double> xs, std::span<const double> ys, double alpha = 0.05,
                          std::span<const double> t = {});

/// Regularized upper incomplete gamma Q(a, x); chi-squared survival is Q(r/2, w/2).
double chi2_sf(double w, int dof);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);
bool intervals_overlap(const Interval& a, const Interval& b);

enum class TestKind { KS, ES };
TestKind test_kind_from_string(const std::string& s);

/// Runs `kind`; ES falls back to KS when the pooled sample is degenerate.
TestOutcome run_test(TestKind kind, std::span<const double> xs, std::span<const double> ys, double alpha);

using Sampler = std::function<std::vector<double>(std::size_t shots, Rng& rng)>;

struct PowerEstimate {
  double p_hat = 0.0;  ///< fraction of reps keeping the null (T = 1)
  Interval ci;
  std::size_t keeps = 0;
  std::size_t reps = 0;
};

PowerEstimate estimate_power(const Sampler& a, const Sampler& b, std::size_t shots, double alpha, std::size_t reps,
                             TestKind kind, Rng& rng);

/// p_hat(T = 1) <= alpha.
bool distinguish_success(double p_hat, double alpha);

/// Optional frequency search for the ES test: returns the (t1, t2 = 2 t1)
/// scale from `grid` (multiples of 1/sigma~) maximizing rejections between
/// the two samplers.
double optimize_es_scale(const Sampler& a, const Sampler& b, std::size_t shots, double alpha, std::size_t reps,
                         std::span<const double> grid, Rng& rng);

}  // namespace mgv
