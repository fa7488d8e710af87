#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <mgverify/dense.hpp>
#include <mgverify/encoding.hpp>
#include <mgverify/noise.hpp>

#include "oracles.hpp"

using namespace mgv;

namespace {

double coeff(const BoundPauliChannel& c, const char* w) { return c.channel().coefficient(PauliString::parse(w)); }

double total(const BoundPauliChannel& c) {
  double s = 0;
  for (double p : c.probabilities()) s += p;
  return s;
}

/// Independent oracle: apply sum_P c(P) P rho P word by word on a dense matrix.
CMatrix apply_by_words(const CMatrix& rho, const BoundPauliChannel& c, int n) {
  CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
  for (std::size_t i = 0; i < c.words().size(); ++i) {
    const CMatrix p = pauli_dense(c.global_word(i, n));
    out += c.probabilities()[i] * p * rho * p.adjoint();
  }
  return out;
}

CMatrix random_density(int n, Rng& rng) {
  std::normal_distribution<double> g;
  const Eigen::Index d = Eigen::Index{1} << n;
  CMatrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
  CMatrix rho = a * a.adjoint();
  return rho / rho.trace();
}

}  // namespace

TEST(Noise, CrosstalkCoefficientsFrozen) {
  const auto c = crosstalk_channel(2, 3, 0.08);
  EXPECT_NEAR(coeff(c, "II"), 0.92, 1e-15);
  for (const char* w : {"XX", "XY", "YX", "YY"}) EXPECT_NEAR(coeff(c, w), 0.02, 1e-15);
  EXPECT_NEAR(coeff(c, "ZZ"), 0.0, 0.0);
  EXPECT_EQ(c.qubits(), (std::vector<int>{2, 3}));
}

TEST(Noise, GateCrosstalkCoversNeighbours) {
  const int targets[2] = {1, 2};
  const auto c = gate_crosstalk(targets, 5, 0.01);
  std::vector<int> qs = c.qubits();
  std::sort(qs.begin(), qs.end());
  EXPECT_EQ(qs, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_NEAR(total(c), 1.0, 1e-12);
  // No crosstalk: identity channel.
  const auto id = gate_crosstalk(targets, 5, 0.0);
  EXPECT_TRUE(id.channel().is_identity());
}

TEST(Noise, GateCrosstalkEqualsSequentialApplication) {
  Rng rng = make_stream(31);
  const int targets[2] = {1, 2};
  const auto c = gate_crosstalk(targets, 4, 0.1);
  const CMatrix rho = random_density(4, rng);
  CMatrix want = rho;
  for (auto [t, b] : std::vector<std::pair<int, int>>{{1, 0}, {1, 2}, {2, 1}, {2, 3}})
    want = apply_by_words(want, crosstalk_channel(t, b, 0.1), 4);
  EXPECT_LT((apply_by_words(rho, c, 4) - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Noise, TwirlOfRotationIsCosSin) {
  // exp(i theta XX): chi diagonal is cos^2 on II and sin^2 on XX.
  const double theta = 0.3;
  GateGenerator g;
  g.coeffs[0] = theta;
  const auto tw = pauli_twirl(LocalChannel::unitary(g.unitary(), {0, 1}));
  EXPECT_NEAR(coeff(tw, "II"), std::cos(theta) * std::cos(theta), 1e-12);
  EXPECT_NEAR(coeff(tw, "XX"), std::sin(theta) * std::sin(theta), 1e-12);
  EXPECT_EQ(tw.words().size(), 2u);
}

TEST(Noise, TwirlPreservesPtmDiagonal) {
  Rng rng = make_stream(32);
  const Matchgate m = mgv::testing::random_matchgate(rng, 0);
  const LocalChannel e = LocalChannel::unitary(m.matrix(), {0, 1});
  const auto tw = pauli_twirl(e);
  const RMatrix r = e.ptm();
  const RMatrix rt = LocalChannel::from_pauli(tw).ptm();
  EXPECT_LT((r.diagonal() - rt.diagonal()).cwiseAbs().maxCoeff(), 1e-12);
  RMatrix off = rt;
  off.diagonal().setZero();
  EXPECT_LT(off.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Noise, TwirlCoefficientsArePositiveAndSumToOne) {
  Rng rng = make_stream(33);
  for (int i = 0; i < 10; ++i) {
    const Matchgate m = mgv::testing::random_matchgate(rng, 1);
    const auto tw = pauli_twirl(LocalChannel::unitary(m.matrix(), {1, 2}));
    EXPECT_NEAR(total(tw), 1.0, 1e-12);
    for (double p : tw.probabilities()) EXPECT_GE(p, 0.0);
  }
}

TEST(Noise, TwirlOfNonCptpThrows) {
  LocalChannel bad{{0}, {2.0 * CMatrix::Identity(2, 2)}};
  EXPECT_THROW(pauli_twirl(bad), ValidationError);
}

TEST(Noise, OverrotationUsesAbsoluteCoefficients) {
  GateGenerator g;
  g.coeffs[0] = -0.4;
  g.coeffs[3] = 0.2;
  const auto e = overrotation_channel(g, 0.5, 3);
  GateGenerator want;
  want.coeffs[0] = 0.2;
  want.coeffs[3] = 0.1;
  EXPECT_LT((e.kraus.at(0) - want.unitary()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(e.targets, (std::vector<int>{3, 4}));
}

TEST(Noise, FswapOverrotationStaysMatchgate) {
  const auto e = overrotation_channel(fswap_generator(), 0.05, 0);
  EXPECT_TRUE(is_matchgate(e.kraus.at(0)));
}

TEST(Noise, ChannelCompositionMatchesSequential) {
  Rng rng = make_stream(34);
  const auto a = crosstalk_channel(0, 1, 0.2);
  GateGenerator g;
  g.coeffs[4] = 0.3;
  const auto b = pauli_twirl(overrotation_channel(g, 1.0, 1));
  const auto ab = compose(a, b);
  const CMatrix rho = random_density(3, rng);
  EXPECT_LT((apply_by_words(rho, ab, 3) - apply_by_words(apply_by_words(rho, a, 3), b, 3)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Noise, NoisyPauliLayerTwirlsComposite) {
  const LocalChannel delta = LocalChannel::unitary(pauli_dense(PauliString::parse("X")), {0});
  GateGenerator g;
  g.coeffs[5] = 0.2;  // IZ on (0,1): restrict to a single-qubit Z rotation below
  Mat2 rz;
  rz << std::exp(cplx(0, 0.2)), 0, 0, std::exp(cplx(0, -0.2));
  const LocalChannel e = LocalChannel::unitary(rz, {0});
  const auto tw = compose_noisy_pauli(delta, e);
  // X exp(i 0.2 Z) = cos(0.2) X + i sin(0.2) XZ -> X with cos^2, Y with sin^2
  EXPECT_NEAR(coeff(tw, "X"), std::cos(0.2) * std::cos(0.2), 1e-12);
  EXPECT_NEAR(coeff(tw, "Y"), std::sin(0.2) * std::sin(0.2), 1e-12);
}

TEST(Noise, MeasurementErrorIsFlipWeight) {
  std::map<PauliString, double> e{{PauliString::parse("II"), 0.7},
                                  {PauliString::parse("XI"), 0.1},
                                  {PauliString::parse("YZ"), 0.15},
                                  {PauliString::parse("ZX"), 0.05}};
  const auto ch = LocalChannel::from_pauli(BoundPauliChannel({4, 5}, PauliChannel(2, e)));
  EXPECT_NEAR(measurement_error_params(ch, 4).epsilon, 0.25, 1e-12);
  EXPECT_NEAR(measurement_error_params(ch, 5).epsilon, 0.05, 1e-12);
  EXPECT_THROW(measurement_error_params(ch, 6), ValidationError);
}

TEST(Noise, DriftScheduleFrozen) {
  const auto g = drift_schedule(0.1, 3.0, 4);
  const double want[4] = {0.1, 0.15, 0.2, 0.25};
  for (int l = 0; l < 4; ++l) EXPECT_NEAR(g[static_cast<std::size_t>(l)], want[l], 1e-15);
  for (double v : drift_schedule(0.05, 1.0, 9)) EXPECT_DOUBLE_EQ(v, 0.05);
}

TEST(Noise, PerturbationStaysOnAdmissibleWords) {
  Rng rng = make_stream(35);
  const auto c = crosstalk_channel(0, 1, 0.05);
  const auto p = perturb_pauli_channel(c, 0.01, rng);
  EXPECT_NEAR(total(p), 1.0, 1e-12);
  double l1 = 0;
  for (const auto& w : all_paulis(2)) l1 += std::abs(p.channel().coefficient(w) - c.channel().coefficient(w));
  EXPECT_GT(l1, 0.0);
  // eps*|N|_1 <= eps*sqrt(16) before normalization, at most doubled by it
  EXPECT_LT(l1, 8 * 0.01 + 1e-12);
  Rng rng2 = make_stream(35);
  const auto zero = perturb_pauli_channel(c, 0.0, rng2);
  for (const auto& w : all_paulis(2)) EXPECT_EQ(zero.channel().coefficient(w), c.channel().coefficient(w));
}

TEST(Noise, PerturbationRespectsSupport) {
  Rng rng = make_stream(36);
  std::map<PauliString, double> e{{PauliString::parse("II"), 0.9}, {PauliString::parse("XI"), 0.1}};
  const auto p = perturb_pauli_channel(BoundPauliChannel({0, 1}, PauliChannel(2, e)), 0.05, rng);
  for (const auto& [w, v] : p.channel().entries()) EXPECT_EQ(w[1], Pauli::I) << w.str();
}

TEST(Noise, PauliChannelValidation) {
  EXPECT_THROW(PauliChannel(1, {{PauliString::parse("X"), -0.1}, {PauliString::parse("I"), 1.1}}), ValidationError);
  EXPECT_THROW(PauliChannel(1, {{PauliString::parse("X"), 0.5}}), ValidationError);
  EXPECT_NO_THROW(PauliChannel(1, {{PauliString::parse("X"), 0.5}}, true));
}

TEST(Noise, PauliChannelJsonRoundTrip) {
  const auto c = crosstalk_channel(0, 1, 0.03).channel();
  const auto back = PauliChannel::from_json(c.to_json());
  for (const auto& w : all_paulis(2)) EXPECT_DOUBLE_EQ(back.coefficient(w), c.coefficient(w));
}

TEST(Noise, ErrorModelConfigValidation) {
  ErrorModelConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.p_c = -0.1;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.gamma = -1;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.p_c = 0.02;
  cfg.gamma_tilde = 2.0;
  const auto back = ErrorModelConfig::from_json(cfg.to_json());
  EXPECT_DOUBLE_EQ(back.p_c, 0.02);
  EXPECT_DOUBLE_EQ(back.gamma_tilde, 2.0);
}

TEST(Noise, BindingsRespectLocalityAndExemptions) {
  Circuit base(2);
  base.add_cz(0, 1);
  const auto gad = gadgetize(encode_universal(base).encoded, MagicKind::MPrime);
  ErrorModelConfig cfg;
  cfg.p_c = 0.01;
  cfg.gamma = 0.1;
  cfg.readout_flip = 0.02;
  const auto b = build_bindings(gad.circuit, cfg);
  ASSERT_EQ(b.per_op.size(), gad.circuit.size());
  for (std::size_t i = 0; i < gad.circuit.size(); ++i) {
    const auto& op = gad.circuit[i];
    if (op.prep || op.is<CorrectionOp>() || op.is<PauliOp>()) EXPECT_FALSE(b.per_op[i].has_value()) << i;
    if (op.is<MatchgateOp>() && !op.prep) {
      ASSERT_TRUE(b.per_op[i].has_value());
      EXPECT_LE(b.per_op[i]->qubits().size(), 4u);
    }
    if (op.is<MeasureOp>()) EXPECT_NEAR(b.per_op[i]->channel().flip_probability(0), 0.02, 1e-15);
  }
  for (int q = 0; q < gad.circuit.data_width(); ++q) EXPECT_TRUE(b.readout[static_cast<std::size_t>(q)].has_value());
}

TEST(Noise, CzGetsCrosstalkOnly) {
  Circuit c(4);
  c.add_cz(1, 2);
  ErrorModelConfig cfg;
  cfg.p_c = 0.0;
  cfg.gamma = 0.5;
  const auto b = build_bindings(c, cfg);
  EXPECT_TRUE(b.per_op[0]->channel().is_identity());
}

TEST(Noise, LocalChannelPtmOfIdentity) {
  const auto id = LocalChannel::identity({0, 1});
  EXPECT_TRUE(id.is_cptp());
  EXPECT_LT((id.ptm() - RMatrix::Identity(16, 16)).cwiseAbs().maxCoeff(), 1e-15);
}
