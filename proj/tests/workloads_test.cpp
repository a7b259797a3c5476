#include "pimsec/workloads.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "pimsec/errors.hpp"

namespace pimsec {
namespace {

WorkloadParams small() {
  WorkloadParams p;
  p.mlp_depth = 3;
  p.linreg_iterations = 5;
  p.logreg_iterations = 5;
  return p;
}

std::vector<oracle::Mat> to_mats(const MlpModel& m) {
  std::vector<oracle::Mat> out;
  for (const auto& l : m.layers) out.push_back(oracle::to_mat(l));
  return out;
}

TEST(Workloads, ParseNames) {
  for (auto w : kAllWorkloads) EXPECT_EQ(parse_workload(to_string(w)), w);
  EXPECT_THROW(parse_workload("resnet"), ConfigError);
}

TEST(Mlp, IdentityLayerPassesNonnegativeInput) {
  Host h({Scheme::pim_runtime, true}, 1);
  MlpModel m{{RingMatrix(RingMatrix::Identity(4, 4) * kFxOne)}};
  const RingVector x = (RingVector(4) << 0, 1, 4096, 12345).finished();
  EXPECT_EQ(mlp_infer(h, m, x), x);
}

TEST(Mlp, NegativeIntermediateIsZeroed) {
  RingMatrix w1(2, 2), w2(2, 2);
  w1 << kFxOne, 0, 0, from_signed(-4096);
  w2 << kFxOne, kFxOne, kFxOne, kFxOne;
  MlpModel m{{w1, w2}};
  const RingVector x = (RingVector(2) << 100, 200).finished();
  for (Scheme s : kAllSchemes) {
    Host h({s, true}, 2);
    const RingVector y = mlp_infer(h, m, x);
    EXPECT_EQ(oracle::to_vec(y), oracle::mlp(to_mats(m), oracle::to_vec(x))) << to_string(s);
    EXPECT_EQ(y, (RingVector(2) << 100, 100).finished());
  }
}

TEST(Mlp, TenLayersMatchOracleEverywhere) {
  const WorkloadParams p;
  const MlpModel m = make_mlp(p, 5);
  const RingVector x = make_mlp_input(p, 5);
  const oracle::Vec want = oracle::mlp(to_mats(m), oracle::to_vec(x));
  for (Scheme s : kAllSchemes) {
    Host h({s, true}, 9);
    EXPECT_EQ(oracle::to_vec(mlp_infer(h, m, x)), want) << to_string(s);
    EXPECT_EQ(h.log().verifications.size(), 10u);
  }
}

TEST(Mlp, DimensionMismatch) {
  Host h({Scheme::cpu_insecure, false}, 1);
  MlpModel m{{RingMatrix::Zero(3, 4)}};
  EXPECT_THROW(mlp_infer(h, m, RingVector::Zero(3)), DimensionError);
}

TEST(Dlrm, SmallExample) {
  EmbeddingInput in;
  RingMatrix t(3, 2);
  t << 1, 2, 3, 4, 5, 6;
  in.tables = {RingMatrix(t * kFxOne)};
  in.batch = 1;
  in.pf = 2;
  in.ids = {{0, 2}};
  in.weights = {(RingVector(2) << kFxOne, kFxOne).finished()};
  Host h({Scheme::pim_runtime, true}, 1);
  const auto out = dlrm_lookup(h, in);
  EXPECT_EQ(out[0], (RingMatrix(1, 2) << 6 * kFxOne, 8 * kFxOne).finished());
}

TEST(Dlrm, ZeroWeightsGiveZeros) {
  WorkloadParams p;
  EmbeddingInput in = make_embedding(p, 3);
  for (auto& w : in.weights) w.setZero();
  Host h({Scheme::pim_runtime, false}, 1);
  for (const auto& m : dlrm_lookup(h, in)) EXPECT_TRUE((m.array() == 0).all());
}

TEST(Dlrm, PoolingIsPermutationInvariant) {
  WorkloadParams p;
  EmbeddingInput in = make_embedding(p, 4);
  Host h1({Scheme::pim_runtime, false}, 1);
  const auto a = dlrm_lookup(h1, in);
  // reverse the (id, weight) pairs inside every batch element
  for (std::size_t t = 0; t < in.tables.size(); ++t) {
    for (std::size_t k = 0; k < in.batch; ++k) {
      std::reverse(in.ids[t].begin() + static_cast<long>(k * in.pf), in.ids[t].begin() + static_cast<long>((k + 1) * in.pf));
      auto seg = in.weights[t].segment(static_cast<Eigen::Index>(k * in.pf), static_cast<Eigen::Index>(in.pf));
      seg.reverseInPlace();
    }
  }
  Host h2({Scheme::pim_runtime, false}, 2);
  EXPECT_EQ(a, dlrm_lookup(h2, in));
}

TEST(Dlrm, OneVerificationPerTable) {
  Host h({Scheme::pim_precompute, true}, 1);
  dlrm_lookup(h, make_embedding(WorkloadParams{}, 1));
  EXPECT_EQ(h.log().verifications.size(), 4u);
  EXPECT_EQ(h.costs().online.host_mac_ops, 4u * 8u * 4u * 8u);  // reduce only
}

TEST(Linreg, IdentityToyConvergesAndMatchesOracle) {
  RegressionData d;
  d.x = RingMatrix::Identity(2, 2) * kFxOne;
  d.y = (RingVector(2) << kFxOne, 2 * kFxOne).finished();
  d.w0 = RingVector::Zero(2);
  d.cfg.iterations = 200;
  d.cfg.lr = fx_from_double(0.1);
  std::vector<double> loss;
  const oracle::Vec want =
      oracle::train(oracle::to_mat(d.x), oracle::to_vec(d.y), oracle::to_vec(d.w0), 200, to_signed(d.cfg.lr), false, &loss);
  for (std::size_t i = 1; i < loss.size(); ++i) EXPECT_LE(loss[i], loss[i - 1]);
  EXPECT_NEAR(static_cast<double>(want[0]), 4096.0, 16.0);
  EXPECT_NEAR(static_cast<double>(want[1]), 8192.0, 16.0);
  Host h({Scheme::pim_runtime, true}, 3);
  EXPECT_EQ(oracle::to_vec(linreg_train(h, d)), want);
  EXPECT_EQ(h.log().verifications.size(), 400u);
}

TEST(Linreg, ZeroIterationsKeepWeights) {
  RegressionData d = make_linreg(WorkloadParams{}, 1);
  d.cfg.iterations = 0;
  d.w0.setConstant(77);
  Host h({Scheme::pim_runtime, false}, 1);
  EXPECT_EQ(linreg_train(h, d), d.w0);
}

TEST(Linreg, DefaultSizeMatchesOracleInEveryTrainingScheme) {
  const RegressionData d = make_linreg(WorkloadParams{}, 6);
  const oracle::Vec want = oracle::train(oracle::to_mat(d.x), oracle::to_vec(d.y), oracle::to_vec(d.w0),
                                         d.cfg.iterations, to_signed(d.cfg.lr), false);
  for (Scheme s : kAllSchemes) {
    Host h({s, true}, 4);
    if (s == Scheme::pim_precompute) {
      EXPECT_THROW(linreg_train(h, d), ConfigError);
      continue;
    }
    EXPECT_EQ(oracle::to_vec(linreg_train(h, d)), want) << to_string(s);
    EXPECT_EQ(h.log().verifications.size(), 2 * d.cfg.iterations);
  }
}

TEST(Linreg, InferenceWorksInPrecompute) {
  const RegressionData d = make_linreg(WorkloadParams{}, 7);
  const RingVector w = (RingVector(4) << 100, -200, 300, 4096).finished();
  Host a({Scheme::pim_precompute, true}, 1);
  Host b({Scheme::cpu_insecure, true}, 1);
  EXPECT_EQ(linreg_infer(a, d.x, w), linreg_infer(b, d.x, w));
  EXPECT_EQ(a.costs().online.host_mac_ops, 0u);
}

TEST(Logreg, VariantsAgreeBitExactly) {
  WorkloadParams p;
  p.logreg_iterations = 10;
  const RegressionData d = make_logreg(p, 8);
  Host a({Scheme::pim_runtime, true, Variant::A}, 1);
  Host y({Scheme::pim_runtime, true, Variant::A2Y}, 1);
  EXPECT_EQ(logreg_train(a, d), logreg_train(y, d));
  EXPECT_EQ(a.log().verifications.size(), 20u);
  EXPECT_EQ(y.log().verifications.size(), 20u);
  EXPECT_EQ(y.log().a2y_switches, 64u * 10u);
  EXPECT_TRUE(y.log().ot_one_label_per_wire);
}

TEST(Logreg, SeparableToyLearns) {
  const RegressionData d = make_logreg(WorkloadParams{}, 9);
  std::vector<double> loss;
  const oracle::Vec want = oracle::train(oracle::to_mat(d.x), oracle::to_vec(d.y), oracle::to_vec(d.w0),
                                         d.cfg.iterations, to_signed(d.cfg.lr), true, &loss);
  EXPECT_LT(loss.back(), loss.front());
  Host h({Scheme::pim_runtime, false}, 5);
  const RingVector w = logreg_train(h, d);
  ASSERT_EQ(oracle::to_vec(w), want);
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    const std::int64_t z = oracle::rescale(oracle::gemv({oracle::to_vec(d.x.row(i).transpose())}, want)[0]);
    correct += (oracle::clamp_sigmoid(z) > 2048) == (d.y[i] == kFxOne);
  }
  EXPECT_GE(correct, 58u);
}

TEST(Logreg, ActivationAtMarginZeroIsHalf) {
  RegressionData d;
  d.x = RingMatrix::Zero(2, 2);
  d.y = RingVector::Zero(2);
  d.w0 = RingVector::Zero(2);
  d.cfg.iterations = 1;
  Host h({Scheme::pim_runtime, false, Variant::A2Y}, 1);
  const auto x = h.register_private(d.x, "X", kColumnTags);
  EXPECT_EQ(h.activation_a2y(x, d.w0, "act"), RingVector(RingVector::Constant(2, kFxHalf)));
}

TEST(Logreg, PrecomputeRejectsTraining) {
  Host h({Scheme::pim_precompute, false}, 1);
  EXPECT_THROW(logreg_train(h, make_logreg(WorkloadParams{}, 1)), ConfigError);
}

TEST(Gemm, IdentityGivesA) {
  std::mt19937_64 rng(1);
  RingMatrix a(5, 5);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = static_cast<Word>(rng() % 100);
  Host h({Scheme::pim_precompute, true}, 1);
  EXPECT_EQ(gemm_by_gemv(h, a, RingMatrix::Identity(5, 5)), a);
  EXPECT_EQ(h.log().verifications.size(), 5u);
}

TEST(Gemm, RandomMatchesOracleEverywhere) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> d(-4096, 4096);
  RingMatrix a(8, 8), b(8, 8);
  for (Eigen::Index i = 0; i < 64; ++i) {
    a.data()[i] = static_cast<Word>(d(rng));
    b.data()[i] = static_cast<Word>(d(rng));
  }
  const oracle::Mat am = oracle::to_mat(a), bm = oracle::to_mat(b);
  for (Scheme s : kAllSchemes) {
    Host h({s, true}, 3);
    const oracle::Mat c = oracle::to_mat(gemm_by_gemv(h, a, b));
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 8; ++j) {
        std::int64_t acc = 0;
        for (std::size_t k = 0; k < 8; ++k) acc += am[i][k] * bm[k][j];
        EXPECT_EQ(c[i][j], oracle::wrap(acc));
      }
  }
}

TEST(Conv, OnesGiveFours) {
  Host h({Scheme::pim_runtime, true}, 1);
  const RingMatrix out = conv_by_unroll(h, RingMatrix::Ones(4, 4), RingMatrix::Ones(2, 2), 2);
  EXPECT_EQ(out, RingMatrix(RingMatrix::Constant(2, 2, 4)));
}

TEST(Conv, UnrollLayout) {
  RingMatrix in(4, 4);
  for (Eigen::Index i = 0; i < 16; ++i) in.data()[i] = static_cast<Word>(i);
  const RingMatrix u = unroll(in, 2, 2);
  ASSERT_EQ(u.rows(), 4);
  EXPECT_EQ(u.row(0), (RingVector(4) << 0, 1, 4, 5).finished().transpose());
  EXPECT_EQ(u.row(3), (RingVector(4) << 10, 11, 14, 15).finished().transpose());
}

TEST(Conv, RandomMatchesDirectConvolution) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> d(-4096, 4096);
  for (Eigen::Index stride : {1, 2}) {
    RingMatrix in(5, 5), k(2, 2);
    for (Eigen::Index i = 0; i < in.size(); ++i) in.data()[i] = static_cast<Word>(d(rng));
    for (Eigen::Index i = 0; i < k.size(); ++i) k.data()[i] = static_cast<Word>(d(rng));
    for (Scheme s : kAllSchemes) {
      Host h({s, true}, 4);
      EXPECT_EQ(oracle::to_mat(conv_by_unroll(h, in, k, stride)),
                oracle::conv(oracle::to_mat(in), oracle::to_mat(k), static_cast<std::size_t>(stride)));
    }
  }
}

TEST(Conv, BadShape) {
  Host h({Scheme::cpu_insecure, false}, 1);
  EXPECT_THROW(conv_by_unroll(h, RingMatrix::Ones(2, 2), RingMatrix::Ones(3, 3), 1), DimensionError);
}

TEST(Generators, StayInsideNoOverflowRange) {
  // the integrity check assumes every true product fits in int32
  const WorkloadParams p;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const RegressionData d = make_logreg(p, seed);
    oracle::Vec w = oracle::to_vec(d.w0);
    const oracle::Mat x = oracle::to_mat(d.x);
    for (std::size_t it = 0; it < d.cfg.iterations; ++it) {
      for (const auto& row : x) {
        std::int64_t z = 0;
        for (std::size_t j = 0; j < w.size(); ++j) z += row[j] * w[j];
        ASSERT_LT(std::abs(z), std::int64_t{1} << 31);
      }
      w = oracle::train(x, oracle::to_vec(d.y), w, 1, to_signed(d.cfg.lr), true);
    }
  }
}

TEST(Workloads, RunWorkloadIsSchemeIndependent) {
  const WorkloadParams p = small();
  for (auto kind : kAllWorkloads) {
    Host ref({Scheme::cpu_insecure, false}, 1);
    const RingVector want = run_workload(ref, kind, p, 11);
    for (Scheme s : kAllSchemes) {
      if (s == Scheme::pim_precompute && is_training(kind)) continue;
      Host h({s, true}, 2);
      EXPECT_EQ(run_workload(h, kind, p, 11), want) << to_string(kind) << " " << to_string(s);
    }
  }
}

}  // namespace
}  // namespace pimsec
