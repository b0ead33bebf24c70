#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "debias/error.hpp"
#include "debias/training.hpp"
#include "reference.hpp"
#include "test_util.hpp"

using namespace debias;
using testutil::random_instance;
using testutil::same_bits;
using testutil::synth_labels;
using testutil::synth_model;
using testutil::synth_rows;

namespace {

ModelSpec small_spec(EncoderVariant v, CombineMode c) {
  ModelSpec s;
  s.encoder = EncoderKind{v, 4, v == EncoderVariant::kRecurrent ? 3u : 0u};
  s.combine = c;
  s.mlp_hidden = 5;
  s.labels = synth_labels();
  return s;
}

Gradients grads_for(const TrainConfig& cfg, const ModelParams& m,
                    std::span<const IndexedExample> batch,
                    std::span<const PremiseSwap> swaps = {}) {
  return objective_gradients(cfg, m, batch, swaps);
}

TrainConfig config(Method method, double alpha, double beta,
                   Routing routing = Routing::kReversal) {
  TrainConfig c;
  c.method = method;
  c.alpha = alpha;
  c.beta = beta;
  c.routing = routing;
  return c;
}

Gradients group_only(const ModelParams& m, const Gradients& g, ParamGroup group) {
  Gradients out;
  for (const auto& p : m.params) {
    if (p.group() == group) out.emplace(p.id(), g.at(p.id()));
  }
  return out;
}

bool params_equal(const ModelParams& a, const ModelParams& b) {
  if (a.params.size() != b.params.size()) return false;
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    if (!same_bits(a.params[i].value, b.params[i].value)) return false;
  }
  return true;
}

constexpr ParamGroup kAllParamGroups[] = {
    ParamGroup::kPremiseEncoder, ParamGroup::kHypothesisEncoder, ParamGroup::kClassifier,
    ParamGroup::kHypothesisHead};

constexpr double kLn2 = 0.69314718055994530942;

}  // namespace

// ---- loss values -------------------------------------------------------------

TEST(Loss, ZeroParametersGiveLn2) {
  ModelParams m = synth_model(1);
  for (auto& p : m.params) std::fill(p.value.data().begin(), p.value.data().end(), 0.0);
  const auto rows = synth_rows(SynthVariant::kB, 8, 1);
  Tape t;
  const LossTerms l = loss_baseline(t, m, rows);
  EXPECT_NEAR(l.main, kLn2, 1e-15);
  EXPECT_NEAR(l.root.value().item(), kLn2, 1e-15);
  Tape t1;
  const LossTerms a = loss_method1(t1, m, rows, 1.0, 1.0);
  EXPECT_NEAR(a.adv, kLn2, 1e-15);
}

TEST(Loss, SingleExampleIsMinusLogProb) {
  const ModelParams m = synth_model(3);
  const auto rows = synth_rows(SynthVariant::kB, 4, 2);
  for (const auto& ex : rows) {
    Tape t;
    const LossTerms l = loss_baseline(t, m, std::span(&ex, 1));
    Tape t2;
    const Var lp = forward_log_probs(t2, m, std::span(&ex, 1));
    EXPECT_NEAR(l.main, -lp.value().at(0, static_cast<std::size_t>(ex.label)), 1e-14);
  }
}

TEST(Loss, BatchValuesMatchReference) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto in = random_instance(Method::kMethod1, Routing::kReversal, seed);
    const ref::Model r = ref::Model::from(in.m);
    long double main = 0, adv = 0;
    for (const auto& ex : in.batch) {
      main += r.nll_main(ex.premise, ex);
      adv += r.nll_head(ex);
    }
    main /= in.batch.size();
    adv /= in.batch.size();
    Tape t;
    const LossTerms l = loss_method1(t, in.m, in.batch, in.cfg.alpha, in.cfg.beta);
    EXPECT_NEAR(l.main, static_cast<double>(main), 1e-13);
    EXPECT_NEAR(l.adv, static_cast<double>(adv), 1e-13);
    Tape th;
    EXPECT_NEAR(loss_hypothesis_only(th, in.m, in.batch).root.value().item(),
                static_cast<double>(adv), 1e-13);
  }
}

TEST(Loss, GroupObjectiveMatchesReference) {
  for (auto method : {Method::kBaseline, Method::kMethod1, Method::kMethod2,
                      Method::kHypothesisOnly}) {
    for (auto routing : {Routing::kReversal, Routing::kLiteral}) {
      auto in = random_instance(method, routing, 40);
      const ref::Model r = ref::Model::from(in.m);
      for (auto g : kAllParamGroups) {
        EXPECT_NEAR(group_objective(g, in.cfg, in.m, in.batch, in.swaps),
                    static_cast<double>(ref::objective(r, g, in.cfg, in.batch, in.swaps)),
                    1e-12)
            << to_string(method) << ' ' << to_string(routing) << ' ' << to_string(g);
      }
    }
  }
}

// ---- reductions to the baseline ----------------------------------------------

class Reduction : public ::testing::TestWithParam<std::tuple<int, Routing>> {};

TEST_P(Reduction, Method1AtZeroIsBaselineBitwise) {
  const auto [seed, routing] = GetParam();
  auto in = random_instance(Method::kMethod1, routing, static_cast<std::uint64_t>(seed));
  const Gradients base = grads_for(config(Method::kBaseline, 0, 0), in.m, in.batch);
  const Gradients m1 = grads_for(config(Method::kMethod1, 0, 0, routing), in.m, in.batch);
  EXPECT_TRUE(same_bits(base, m1));
}

TEST_P(Reduction, Method2AtZeroIsBaselineBitwise) {
  const auto [seed, routing] = GetParam();
  auto in = random_instance(Method::kMethod2, routing, static_cast<std::uint64_t>(seed));
  const Gradients base = grads_for(config(Method::kBaseline, 0, 0), in.m, in.batch);
  for (double beta : {0.0, 1.0, 2.5}) {
    const Gradients m2 = grads_for(config(Method::kMethod2, 0, beta, routing), in.m, in.batch);
    EXPECT_TRUE(same_bits(base, m2)) << beta;
  }
}

TEST_P(Reduction, Method1AlphaZeroKeepsClassifierOnBaseline) {
  const auto [seed, routing] = GetParam();
  auto in = random_instance(Method::kMethod1, routing, static_cast<std::uint64_t>(seed));
  const Gradients base = grads_for(config(Method::kBaseline, 0, 0), in.m, in.batch);
  const Gradients m1 = grads_for(config(Method::kMethod1, 0, 1, routing), in.m, in.batch);
  for (auto g : {ParamGroup::kPremiseEncoder, ParamGroup::kHypothesisEncoder,
                 ParamGroup::kClassifier}) {
    EXPECT_TRUE(same_bits(group_only(in.m, base, g), group_only(in.m, m1, g))) << to_string(g);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, Reduction,
                         ::testing::Combine(::testing::Range(1, 9),
                                            ::testing::Values(Routing::kReversal,
                                                              Routing::kLiteral)));

// ---- gradients against the long double reference --------------------------------

struct GradCase {
  Method method;
  Routing routing;
  EncoderVariant variant;
  CombineMode combine;
};

class GradientOracle
    : public ::testing::TestWithParam<std::tuple<GradCase, int>> {};

TEST_P(GradientOracle, EveryGroupMatchesNumericDerivative) {
  const auto [c, seed] = GetParam();
  auto in = random_instance(c.method, c.routing, static_cast<std::uint64_t>(seed), 6,
                            small_spec(c.variant, c.combine));
  const Gradients g = grads_for(in.cfg, in.m, in.batch, in.swaps);
  double worst = 0.0;
  for (auto group : kAllParamGroups) {
    const auto numeric = ref::numeric_gradient(in.m, group, in.cfg, in.batch, in.swaps);
    for (const auto& p : in.m.params) {
      if (p.group() != group) continue;
      const Tensor& a = g.at(p.id());
      const auto& n = numeric.at(p.name());
      ASSERT_EQ(a.size(), n.size());
      for (std::size_t i = 0; i < n.size(); ++i) {
        const double nd = static_cast<double>(n[i]);
        const double rel = std::fabs(a[i] - nd) / std::max(std::fabs(a[i]) + std::fabs(nd), 1e-6);
        worst = std::max(worst, rel);
        EXPECT_LT(rel, 1e-6) << p.name() << '[' << i << "] analytic " << a[i] << " numeric "
                             << nd;
      }
    }
  }
  RecordProperty("worst_rel_error", std::to_string(worst));
}

INSTANTIATE_TEST_SUITE_P(
    Objectives, GradientOracle,
    ::testing::Combine(
        ::testing::Values(
            GradCase{Method::kBaseline, Routing::kReversal, EncoderVariant::kBag,
                     CombineMode::kConcat},
            GradCase{Method::kMethod1, Routing::kReversal, EncoderVariant::kBag,
                     CombineMode::kConcat},
            GradCase{Method::kMethod1, Routing::kLiteral, EncoderVariant::kBag,
                     CombineMode::kConcat},
            GradCase{Method::kMethod2, Routing::kReversal, EncoderVariant::kBag,
                     CombineMode::kConcat},
            GradCase{Method::kMethod2, Routing::kLiteral, EncoderVariant::kBag,
                     CombineMode::kConcat},
            GradCase{Method::kHypothesisOnly, Routing::kReversal, EncoderVariant::kBag,
                     CombineMode::kConcat},
            GradCase{Method::kMethod1, Routing::kReversal, EncoderVariant::kRecurrent,
                     CombineMode::kInferSent},
            GradCase{Method::kMethod2, Routing::kLiteral, EncoderVariant::kMean,
                     CombineMode::kInferSent},
            GradCase{Method::kMethod2, Routing::kReversal, EncoderVariant::kRecurrent,
                     CombineMode::kConcat}),
        ::testing::Values(1, 2, 3)));

TEST(CheckGradients, LibraryCheckPassesOnAllObjectives) {
  for (auto method : {Method::kBaseline, Method::kMethod1, Method::kMethod2}) {
    for (auto routing : {Routing::kReversal, Routing::kLiteral}) {
      auto in = random_instance(method, routing, 77);
      const auto r = check_gradients(in.cfg, in.m, in.batch, in.swaps);
      EXPECT_EQ(r.size(), std::size(kAllParamGroups));
      for (const auto& [g, res] : r) EXPECT_LT(res.rel_error, 1e-6) << to_string(g);
    }
  }
}

// ---- routing invariants --------------------------------------------------------

class RoutingInvariant : public ::testing::TestWithParam<int> {};

TEST_P(RoutingInvariant, Method1HypothesisEncoderIsMainMinusScaledAdversary) {
  // The adversarial contribution to the hypothesis encoder is the
  // hyp-only gradient times -alpha (literal) or -alpha*beta (reversal).
  const std::uint64_t seed = static_cast<std::uint64_t>(GetParam());
  auto in = random_instance(Method::kMethod1, Routing::kLiteral, seed);
  const double a = 0.5, b = 4.0;
  const Gradients main = grads_for(config(Method::kBaseline, 0, 0), in.m, in.batch);
  const Gradients adv = grads_for(config(Method::kHypothesisOnly, 0, 0), in.m, in.batch);
  for (auto routing : {Routing::kLiteral, Routing::kReversal}) {
    const double k = routing == Routing::kLiteral ? a : a * b;
    const double head_k = routing == Routing::kLiteral ? b : a;
    const Gradients g = grads_for(config(Method::kMethod1, a, b, routing), in.m, in.batch);
    for (const auto& p : in.m.params) {
      const Tensor& got = g.at(p.id());
      for (std::size_t i = 0; i < got.size(); ++i) {
        double want = 0.0;
        switch (p.group()) {
          case ParamGroup::kHypothesisEncoder:
            want = main.at(p.id())[i] - k * adv.at(p.id())[i];
            break;
          case ParamGroup::kHypothesisHead:
            want = head_k * adv.at(p.id())[i];
            break;
          default:
            want = main.at(p.id())[i];
        }
        EXPECT_NEAR(got[i], want, 1e-14 * std::max(1.0, std::fabs(want)))
            << to_string(routing) << ' ' << p.name();
      }
    }
  }
}

TEST_P(RoutingInvariant, Method2PremiseNeverSeesSwappedRows) {
  const std::uint64_t seed = static_cast<std::uint64_t>(GetParam());
  for (auto routing : {Routing::kReversal, Routing::kLiteral}) {
    auto in = random_instance(Method::kMethod2, routing, seed);
    const Gradients g = grads_for(in.cfg, in.m, in.batch, in.swaps);
    auto other = in.swaps;
    for (auto& s : other) s.premise = {4, 3, 2, 2};
    const Gradients g2 = grads_for(in.cfg, in.m, in.batch, other);
    EXPECT_TRUE(same_bits(group_only(in.m, g, ParamGroup::kPremiseEncoder),
                          group_only(in.m, g2, ParamGroup::kPremiseEncoder)));
    for (const auto& p : in.m.params) {
      if (p.group() == ParamGroup::kHypothesisHead) {
        for (double x : g.at(p.id()).data()) EXPECT_EQ(x, 0.0);
      }
    }
  }
}

TEST_P(RoutingInvariant, Method2AllSwappedZeroesPremiseGradient) {
  const std::uint64_t seed = static_cast<std::uint64_t>(GetParam());
  for (auto routing : {Routing::kReversal, Routing::kLiteral}) {
    auto in = random_instance(Method::kMethod2, routing, seed);
    in.cfg.alpha = 1.0;
    std::vector<std::size_t> ids(in.batch.size());
    std::iota(ids.begin(), ids.end(), 0);
    std::mt19937_64 rng(seed);
    in.swaps = resolve_swaps(select_swaps(ids, ids.size(), 1.0, 1, rng), ids, in.batch);
    ASSERT_EQ(in.swaps.size(), in.batch.size());
    const Gradients g = grads_for(in.cfg, in.m, in.batch, in.swaps);
    for (const auto& p : in.m.params) {
      if (p.group() != ParamGroup::kPremiseEncoder) continue;
      for (double x : g.at(p.id()).data()) EXPECT_EQ(x, 0.0) << p.name();
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RoutingInvariant, ::testing::Range(1, 11));

// ---- premise swaps -------------------------------------------------------------

class SwapProperty : public ::testing::TestWithParam<int> {};

TEST_P(SwapProperty, CountDonorsAndPositions) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
  std::uniform_int_distribution<std::size_t> size(2, 60);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t pool = size(rng);
    std::vector<std::size_t> ids(std::min<std::size_t>(pool, size(rng)));
    std::vector<std::size_t> all(pool);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    std::copy_n(all.begin(), ids.size(), ids.begin());
    const double alpha = frac(rng);
    const auto rec = select_swaps(ids, pool, alpha, trial, rng);
    EXPECT_EQ(rec.size(), static_cast<std::size_t>(std::floor(alpha * ids.size() + 1e-9)));
    std::set<std::size_t> seen;
    for (const auto& r : rec) {
      EXPECT_NE(std::find(ids.begin(), ids.end(), r.example), ids.end());
      EXPECT_TRUE(seen.insert(r.example).second);
      EXPECT_NE(r.donor, r.example);
      EXPECT_LT(r.donor, pool);
      EXPECT_EQ(r.epoch, trial);
    }
  }
}

TEST_P(SwapProperty, ResolvedPremiseIsDonorsAndLabelKept) {
  const auto pool = synth_rows(SynthVariant::kB, 40, static_cast<std::uint64_t>(GetParam()));
  std::vector<std::size_t> ids{3, 7, 11, 12, 30, 31};
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
  const auto rec = select_swaps(ids, pool.size(), 0.5, 1, rng);
  const auto swaps = resolve_swaps(rec, ids, pool);
  ASSERT_EQ(swaps.size(), 3u);
  for (std::size_t k = 0; k < swaps.size(); ++k) {
    EXPECT_EQ(ids[swaps[k].position], rec[k].example);
    EXPECT_EQ(swaps[k].premise, pool[rec[k].donor].premise);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, SwapProperty, ::testing::Range(1, 6));

TEST(Swap, ExactCounts) {
  std::vector<std::size_t> ids(8);
  std::iota(ids.begin(), ids.end(), 0);
  std::mt19937_64 rng(1);
  EXPECT_EQ(select_swaps(ids, 8, 0.25, 1, rng).size(), 2u);
  EXPECT_EQ(select_swaps(ids, 8, 0.0, 1, rng).size(), 0u);
  EXPECT_EQ(select_swaps(ids, 8, 1.0, 1, rng).size(), 8u);
  EXPECT_EQ(select_swaps(ids, 8, 0.3, 1, rng).size(), 2u);
}

// ---- configuration -------------------------------------------------------------

TEST(Config, Validation) {
  EXPECT_NO_THROW(TrainConfig{}.validate());
  EXPECT_THROW(config(Method::kMethod2, 1.5, 1).validate(), Error);
  EXPECT_NO_THROW(config(Method::kMethod2, 1.0, 1).validate());
  EXPECT_NO_THROW(config(Method::kMethod1, 3.0, 1).validate());
  EXPECT_THROW(config(Method::kMethod1, -1, 1).validate(), Error);
  EXPECT_THROW(config(Method::kMethod1, 1, std::nan("")).validate(), Error);
  TrainConfig c;
  c.eval_each = 0;
  EXPECT_THROW(c.validate(), Error);
  c = TrainConfig{};
  c.lr = -0.1;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Config, TextRoundTrip) {
  TrainConfig c = config(Method::kMethod2, 0.25, 1.5, Routing::kLiteral);
  c.lr = 0.03;
  c.max_epochs = 17;
  c.batch_size = 32;
  c.seed = 99;
  c.stop = StopRule::kMaxEpochs;
  c.acc_streak = 4;
  c.loss_tol = 1e-7;
  c.eval_each = 3;
  TrainConfig back;
  std::istringstream in(c.to_config_text());
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    ASSERT_NE(eq, std::string::npos);
    EXPECT_TRUE(apply_config_value(back, line.substr(0, eq), line.substr(eq + 1))) << line;
  }
  EXPECT_EQ(back, c);
  EXPECT_FALSE(apply_config_value(back, "colour", "blue"));
  EXPECT_THROW(apply_config_value(back, "alpha", "lots"), Error);
}

TEST(Config, EnumNames) {
  for (auto m : {Method::kBaseline, Method::kMethod1, Method::kMethod2,
                 Method::kHypothesisOnly}) {
    EXPECT_EQ(parse_method(to_string(m)), m);
  }
  for (auto r : {Routing::kReversal, Routing::kLiteral}) EXPECT_EQ(parse_routing(to_string(r)), r);
  EXPECT_THROW(parse_method("method3"), Error);
}

// ---- training loop -------------------------------------------------------------

TEST(Train, Deterministic) {
  const auto rows = synth_rows(SynthVariant::kB, 40, 5);
  for (auto method : {Method::kMethod1, Method::kMethod2}) {
    TrainConfig c = config(method, method == Method::kMethod2 ? 0.25 : 1.0, 2.0);
    c.max_epochs = 30;
    c.batch_size = 8;
    const auto a = train(synth_model(4), rows, {}, c);
    const auto b = train(synth_model(4), rows, {}, c);
    EXPECT_EQ(a.report, b.report);
    EXPECT_TRUE(params_equal(a.params, b.params));
  }
}

TEST(Train, ZeroLearningRateLeavesParameters) {
  const auto rows = synth_rows(SynthVariant::kB, 20, 5);
  TrainConfig c = config(Method::kMethod1, 1.0, 1.0);
  c.lr = 0.0;
  c.max_epochs = 5;
  const ModelParams init = synth_model(8);
  EXPECT_TRUE(params_equal(train(init, rows, {}, c).params, init));
}

TEST(Train, SmallStepsDecreaseBaselineLoss) {
  const auto rows = synth_rows(SynthVariant::kA, 40, 2);
  TrainConfig c;
  c.lr = 0.01;
  c.max_epochs = 60;
  c.stop = StopRule::kMaxEpochs;
  const auto r = train(synth_model(2), rows, {}, c);
  ASSERT_EQ(r.report.epochs.size(), 60u);
  for (std::size_t i = 1; i < r.report.epochs.size(); ++i) {
    EXPECT_LE(r.report.epochs[i].main_loss, r.report.epochs[i - 1].main_loss);
  }
}

TEST(Train, BaselineNeverMovesHead) {
  const auto rows = synth_rows(SynthVariant::kB, 20, 2);
  TrainConfig c;
  c.max_epochs = 10;
  const ModelParams init = synth_model(3);
  const auto r = train(init, rows, {}, c);
  for (std::size_t i = 0; i < init.params.size(); ++i) {
    const bool head = init.params[i].group() == ParamGroup::kHypothesisHead;
    EXPECT_EQ(same_bits(init.params[i].value, r.params.params[i].value), head)
        << init.params[i].name();
  }
}

TEST(Train, ClipBoundsStepLength) {
  const auto rows = synth_rows(SynthVariant::kB, 20, 2);
  TrainConfig c;
  c.lr = 1.0;
  c.clip_norm = 1e-3;
  c.max_epochs = 1;
  const ModelParams init = synth_model(3);
  const auto r = train(init, rows, {}, c);
  double sq = 0.0;
  for (std::size_t i = 0; i < init.params.size(); ++i) {
    for (std::size_t k = 0; k < init.params[i].value.size(); ++k) {
      const double d = r.params.params[i].value[k] - init.params[i].value[k];
      sq += d * d;
    }
  }
  EXPECT_NEAR(std::sqrt(sq), 1e-3, 1e-12);
}

TEST(Train, DivergenceIsNumericalError) {
  const auto rows = synth_rows(SynthVariant::kB, 20, 2);
  TrainConfig c;
  c.lr = 1e300;
  c.clip_norm = 0.0;
  c.max_epochs = 50;
  try {
    train(synth_model(3), rows, {}, c);
    FAIL() << "expected divergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNumerical);
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(Train, LearnsDatasetB) {
  const auto rows = synth_rows(SynthVariant::kB, 40, 6);
  TrainConfig c;
  c.max_epochs = 2000;
  const auto r = train(synth_model(6), rows, {}, c);
  EXPECT_EQ(accuracy(r.params, rows), 1.0);
  EXPECT_EQ(r.report.epochs.back().train_acc, 1.0);
}

TEST(Train, HypothesisOnlyReadsArtifact) {
  const auto rows = synth_rows(SynthVariant::kB, 40, 6);
  TrainConfig c;
  c.method = Method::kHypothesisOnly;
  c.max_epochs = 2000;
  const auto r = train(synth_model(6), rows, {}, c);
  EXPECT_EQ(accuracy(r.params, rows, true), 1.0);
  EXPECT_EQ(accuracy(r.params, synth_rows(SynthVariant::kA, 40, 6), true), 0.5);
}

TEST(Train, DevSelectionKeepsBestSnapshot) {
  const auto rows = synth_rows(SynthVariant::kB, 20, 3);
  TrainConfig c;
  c.max_epochs = 50;
  const auto r = train(synth_model(3), rows, rows, c);
  EXPECT_GE(r.report.best_dev_acc, accuracy(synth_model(3), rows));
  EXPECT_EQ(accuracy(r.params, rows), r.report.best_dev_acc);
}

TEST(Train, ReportCsv) {
  TrainReport rep;
  rep.epochs = {{1, 0.5, 0.25, 1.0}};
  std::ostringstream out;
  write_report_csv(out, rep);
  EXPECT_EQ(out.str(), "epoch,main_loss,adv_loss,train_acc\n1,0.5,0.25,1\n");
}

TEST(FineTune, EmptySubsetIsIdentity) {
  const ModelParams m = synth_model(5);
  EXPECT_TRUE(params_equal(fine_tune(m, {}, TrainConfig{}).params, m));
}

TEST(FineTune, NeverWorseOnSubset) {
  const ModelParams m = synth_model(5);
  const auto subset = synth_rows(SynthVariant::kA, 8, 9);
  TrainConfig c;
  c.max_epochs = 40;
  const auto r = fine_tune(m, subset, c);
  EXPECT_GE(accuracy(r.params, subset), accuracy(m, subset));
}

// ---- evaluation ----------------------------------------------------------------

TEST(Evaluate, MapsPredictionsThroughLabelMap) {
  const auto rows = synth_rows(SynthVariant::kB, 40, 6);
  TrainConfig c;
  const auto r = train(synth_model(6), rows, {}, c);
  const Dataset b = to_dataset(gen_dataset_B(40, 6), "B");
  const Vocabulary v = testutil::synth_vocab();
  EXPECT_EQ(evaluate(r.params, v, b, LabelMap(LabelMapKind::kIdentity, synth_labels())), 1.0);
  EXPECT_THROW(evaluate(r.params, v, b, LabelMap(LabelMapKind::kIdentity, {"x", "y"})), Error);
  EXPECT_DOUBLE_EQ(accuracy(r.params, rows), 1.0);
}

TEST(EndToEnd, Method1PredictsFirstLetterMatch) {
  const auto rows = synth_rows(SynthVariant::kB, 1000, 11);
  const TrainConfig c = config(Method::kMethod1, 1.0, 4.0);
  const auto r = train(synth_model(1), rows, {}, c);
  const Vocabulary v = testutil::synth_vocab();
  const IndexedExample aa{{v.index("a")}, {v.index("a")}, 0};
  const IndexedExample ab{{v.index("a")}, {v.index("b")}, 0};
  EXPECT_EQ(synth_labels()[static_cast<std::size_t>(predict(aa, r.params))], "TRUE");
  EXPECT_EQ(synth_labels()[static_cast<std::size_t>(predict(ab, r.params))], "FALSE");
  EXPECT_EQ(accuracy(r.params, synth_rows(SynthVariant::kA, 1000, 12)), 1.0);
}
