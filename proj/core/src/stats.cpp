#include "mgverify/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include <Eigen/SVD>
#include <boost/math/special_functions/gamma.hpp>

namespace mgv {

namespace {

void require_nonempty(std::span<const double> xs, std::span<const double> ys) {
  if (xs.empty() || ys.empty()) throw ValidationError("two-sample test needs nonempty samples");
  for (auto s : {xs, ys})
    for (double v : s)
      if (!std::isfinite(v)) throw ValidationError("samples must be finite");
}

}  // namespace

nlohmann::json TestOutcome::to_json() const {
  nlohmann::json j = {{"test", test},     {"statistic", statistic}, {"p_value", p_value},
                      {"alpha", alpha},   {"decision", reject ? "reject-null" : "keep-null"}, {"reject", reject},
                      {"k", k},           {"l", l}};
  if (test == "es") j["dof"] = dof;
  return j;
}

std::uint64_t bits_to_int(const Bitstring& x, std::span<const int> perm) {
  if (x.size() != perm.size()) throw ValidationError("bitstring and permutation lengths differ");
  if (x.size() > 62) throw ValidationError("bitstring too long for integer mapping");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const int p = perm[i];
    if (p < 0 || static_cast<std::size_t>(p) >= x.size()) throw ValidationError("permutation entry out of range");
    if (x[static_cast<std::size_t>(p)]) v += std::uint64_t{1} << (i + 1);
  }
  return v;
}

std::vector<int> identity_permutation(int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  return p;
}

std::vector<int> parse_permutation(const std::string& spec, int n) {
  const std::string prefix = "perm:";
  if (spec.rfind(prefix, 0) != 0) throw ValidationError("mapping must start with 'perm:'");
  const std::string body = spec.substr(prefix.size());
  std::vector<int> p;
  if (body == "identity") return identity_permutation(n);
  if (body == "reverse") {
    p = identity_permutation(n);
    std::reverse(p.begin(), p.end());
    return p;
  }
  std::size_t pos = 0;
  while (pos <= body.size()) {
    const auto next = body.find(',', pos);
    const auto tok = body.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    try {
      p.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw ValidationError("bad permutation entry '" + tok + "'");
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  if (static_cast<int>(p.size()) != n) throw ValidationError("permutation length does not match bitstring length");
  std::set<int> seen(p.begin(), p.end());
  if (static_cast<int>(seen.size()) != n || *seen.begin() != 0 || *seen.rbegin() != n - 1)
    throw ValidationError("mapping is not a permutation");
  return p;
}

std::vector<double> map_bitstrings(const std::vector<Bitstring>& xs, std::span<const int> perm) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(static_cast<double>(bits_to_int(x, perm)));
  return out;
}

double ks_statistic(std::span<const double> xs, std::span<const double> ys) {
  require_nonempty(xs, ys);
  std::vector<double> a(xs.begin(), xs.end()), b(ys.begin(), ys.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() || j < b.size()) {
    // Next pooled jump point; advance both ECDFs past all ties.
    double x;
    if (j >= b.size() || (i < a.size() && a[i] <= b[j])) x = a[i];
    else x = b[j];
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double kolmogorov_sf(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.18) {
    // Theta-function form of the CDF: sqrt(2 pi)/lambda * sum exp(-(2j-1)^2 pi^2 / (8 lambda^2)).
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double cdf = 0.0;
    for (int j = 1; j <= 100; ++j) {
      const double t = std::exp(-(2.0 * j - 1) * (2.0 * j - 1) * pi2 / (8.0 * lambda * lambda));
      cdf += t;
      if (t < 1e-300) break;
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sf = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double t = std::exp(-2.0 * j * j * lambda * lambda);
    sf += (j % 2 ? 2.0 : -2.0) * t;
    if (t < 1e-300) break;
  }
  return std::clamp(sf, 0.0, 1.0);
}

TestOutcome ks_two_sample(std::span<const double> xs, std::span<const double> ys, double alpha) {
  TestOutcome o;
  o.test = "ks";
  o.alpha = alpha;
  o.k = xs.size();
  o.l = ys.size();
  o.statistic = ks_statistic(xs, ys);
  const double k = static_cast<double>(o.k), l = static_cast<double>(o.l);
  o.p_value = kolmogorov_sf(std::sqrt(k * l / (k + l)) * o.statistic);
  o.reject = o.p_value < alpha;
  return o;
}

double semi_interquartile_range(std::span<const double> pooled) {
  if (pooled.size() < 4) throw ValidationError("semi-interquartile range needs at least 4 values");
  std::vector<double> s(pooled.begin(), pooled.end());
  std::sort(s.begin(), s.end());
  const std::size_t k = s.size();
  const std::size_t hi = (3 * k) / 4, lo = k / 4;  // 1-based indices
  return 0.5 * (s[hi - 1] - s[lo - 1]);
}

double chi2_sf(double w, int dof) {
  if (dof <= 0) return 1.0;
  if (!(w > 0.0)) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * w);
}

TestOutcome es_two_sample(std::span<const double> xs, std::span<const double> ys, double alpha,
                          std::span<const double> t) {
  require_nonempty(xs, ys);
  std::vector<double> ts(t.begin(), t.end());
  if (ts.empty()) {
    std::vector<double> pooled(xs.begin(), xs.end());
    pooled.insert(pooled.end(), ys.begin(), ys.end());
    const double sigma = semi_interquartile_range(pooled);
    if (!(sigma > 0.0)) throw DegenerateSampleError("ES test: pooled semi-interquartile range is zero");
    ts = {0.4 / sigma, 0.8 / sigma};
  }
  const int dim = 2 * static_cast<int>(ts.size());
  auto moments = [&](std::span<const double> v, RVector& mean, RMatrix& cov) {
    mean = RVector::Zero(dim);
    RMatrix second = RMatrix::Zero(dim, dim);
    RVector g(dim);
    for (double x : v) {
      for (std::size_t j = 0; j < ts.size(); ++j) {
        g(2 * static_cast<Eigen::Index>(j)) = std::cos(ts[j] * x);
        g(2 * static_cast<Eigen::Index>(j) + 1) = std::sin(ts[j] * x);
      }
      mean += g;
      second.noalias() += g * g.transpose();
    }
    const double n = static_cast<double>(v.size());
    mean /= n;
    cov = second / n - mean * mean.transpose();
  };
  RVector g1, g2;
  RMatrix s1, s2;
  moments(xs, g1, s1);
  moments(ys, g2, s2);
  const double n1 = static_cast<double>(xs.size()), n2 = static_cast<double>(ys.size());
  const double n = n1 + n2;
  const RMatrix omega = (n / 2.0) * (1.0 / n1 + 1.0 / n2) * (s1 + s2);
  Eigen::JacobiSVD<RMatrix> svd(omega, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVector sv = svd.singularValues();
  const double cutoff = 1e-10 * (sv.size() ? sv(0) : 0.0);
  RMatrix pinv = RMatrix::Zero(dim, dim);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > 0.0) {
      pinv.noalias() += svd.matrixV().col(i) * (1.0 / sv(i)) * svd.matrixU().col(i).transpose();
      ++rank;
    }
  const RVector g = g1 - g2;
  TestOutcome o;
  o.test = "es";
  o.alpha = alpha;
  o.k = xs.size();
  o.l = ys.size();
  o.statistic = n * g.dot(pinv * g);
  o.dof = rank;
  o.p_value = rank == 0 ? 1.0 : chi2_sf(o.statistic, rank);
  o.reject = o.p_value < alpha;
  return o;
}

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  // The bounds are exactly 0 and 1 at the extremes; round-off would otherwise leave them off by an ulp.
  return {successes == 0 ? 0.0 : std::max(0.0, centre - half), successes == trials ? 1.0 : std::min(1.0, centre + half)};
}

bool intervals_overlap(const Interval& a, const Interval& b) { return a.lo <= b.hi && b.lo <= a.hi; }

TestKind test_kind_from_string(const std::string& s) {
  if (s == "ks") return TestKind::KS;
  if (s == "es") return TestKind::ES;
  throw ValidationError("unknown test '" + s + "'");
}

TestOutcome run_test(TestKind kind, std::span<const double> xs, std::span<const double> ys, double alpha) {
  if (kind == TestKind::KS) return ks_two_sample(xs, ys, alpha);
  try {
    return es_two_sample(xs, ys, alpha);
  } catch (const DegenerateSampleError&) {
    auto o = ks_two_sample(xs, ys, alpha);
    o.test = "es->ks";
    return o;
  }
}

PowerEstimate estimate_power(const Sampler& a, const Sampler& b, std::size_t shots, double alpha, std::size_t reps,
                             TestKind kind, Rng& rng) {
  if (reps < 1) throw ValidationError("estimate_power needs reps >= 1");
  PowerEstimate pe;
  pe.reps = reps;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto xs = a(shots, rng);
    const auto ys = b(shots, rng);
    if (!run_test(kind, xs, ys, alpha).reject) ++pe.keeps;
  }
  pe.p_hat = static_cast<double>(pe.keeps) / static_cast<double>(reps);
  pe.ci = wilson_interval(pe.keeps, reps);
  return pe;
}

bool distinguish_success(double p_hat, double alpha) {
  if (!(p_hat >= 0.0 && p_hat <= 1.0)) throw ValidationError("p_hat must lie in [0, 1]");
  return p_hat <= alpha;
}

double optimize_es_scale(const Sampler& a, const Sampler& b, std::size_t shots, double alpha, std::size_t reps,
                         std::span<const double> grid, Rng& rng) {
  if (grid.empty()) throw ValidationError("empty frequency grid");
  double best = grid[0];
  std::size_t best_rej = 0;
  for (double scale : grid) {
    std::size_t rej = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto xs = a(shots, rng);
      const auto ys = b(shots, rng);
      std::vector<double> pooled(xs);
      pooled.insert(pooled.end(), ys.begin(), ys.end());
      const double sigma = semi_interquartile_range(pooled);
      if (!(sigma > 0.0)) continue;
      const double t[2] = {scale / sigma, 2.0 * scale / sigma};
      if (es_two_sample(xs, ys, alpha, t).reject) ++rej;
    }
    if (rej > best_rej) {
      best_rej = rej;
      best = scale;
    }
  }
  return best;
}

}  // namespace mgv
