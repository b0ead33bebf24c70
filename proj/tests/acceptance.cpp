// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Diagnostics go to indented lines above each verdict.

#include <malloc.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "debias/harness.hpp"
#include "debias/synthetic.hpp"
#include "debias/training.hpp"
#include "reference.hpp"
#include "test_util.hpp"

using namespace debias;
using testutil::same_bits;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Synthetic {
  Vocabulary vocab = testutil::synth_vocab();
  std::vector<std::string> labels = testutil::synth_labels();
  ModelSpec spec = ModelSpec::synthetic(testutil::synth_labels());
  std::vector<SynthExample> b_raw = gen_dataset_B(1000, 11);
  std::vector<SynthExample> a_raw = gen_dataset_A(1000, 12);
  Dataset a = to_dataset(a_raw, "A");
  std::vector<IndexedExample> train = index_dataset(to_dataset(b_raw, "B"), vocab, labels).examples;
  std::vector<IndexedExample> test = index_dataset(a, vocab, labels).examples;
};

const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};

struct Run {
  double train_acc = 0.0;
  double test_acc = 0.0;
  double secs = 0.0;
  ModelParams params;
};

Run run_once(const Synthetic& d, Method method, double alpha, double beta, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.method = method;
  cfg.alpha = alpha;
  cfg.beta = beta;
  cfg.seed = seed;
  const auto t0 = Clock::now();
  auto r = train(init_params(d.spec, d.vocab.size(), seed), d.train, {}, cfg);
  Run out;
  out.secs = seconds_since(t0);
  out.train_acc = accuracy(r.params, d.train);
  out.test_acc = accuracy(r.params, d.test);
  out.params = std::move(r.params);
  return out;
}

struct CellSummary {
  double median_test = 0.0;
  double median_train = 0.0;
  double max_secs = 0.0;
  std::string accs;
};

CellSummary run_cell(const Synthetic& d, Method method, double alpha, double beta) {
  std::vector<double> tests, trains;
  CellSummary s;
  for (auto seed : kSeeds) {
    const Run r = run_once(d, method, alpha, beta, seed);
    tests.push_back(r.test_acc);
    trains.push_back(r.train_acc);
    s.max_secs = std::max(s.max_secs, r.secs);
    s.accs += (s.accs.empty() ? "" : " ") + format_number(r.test_acc);
  }
  s.median_test = median(tests);
  s.median_train = median(trains);
  return s;
}

int failures = 0;

void verdict(int id, bool ok, const std::string& what) {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << ": " << what << std::endl;
  if (!ok) ++failures;
}

void note(const std::string& line) { std::cout << "    " << line << std::endl; }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// ---- 1 and 2 -------------------------------------------------------------------

struct PhaseCell {
  double alpha, beta;
  enum { kHigh, kLow, kUnlearned } want;
};

void phase_table(int id, const Synthetic& d, Method method, const std::vector<PhaseCell>& cells) {
  bool ok = true;
  double worst_secs = 0.0;
  const auto t0 = Clock::now();
  for (const auto& c : cells) {
    const CellSummary s = run_cell(d, method, c.alpha, c.beta);
    bool cell_ok = false;
    std::string rule;
    switch (c.want) {
      case PhaseCell::kHigh:
        cell_ok = s.median_test >= 0.95;
        rule = "median test >= 0.95";
        break;
      case PhaseCell::kLow:
        cell_ok = s.median_test <= 0.60;
        rule = "median test <= 0.60";
        break;
      case PhaseCell::kUnlearned:
        cell_ok = s.median_train < 0.99;
        rule = "median train < 0.99";
        break;
    }
    worst_secs = std::max(worst_secs, s.max_secs);
    note("(" + format_number(c.alpha) + ", " + format_number(c.beta) + ") " + rule +
         ": median test " + fmt(s.median_test) + ", median train " + fmt(s.median_train) +
         " [test per seed: " + s.accs + "] " + (cell_ok ? "ok" : "MISS"));
    ok = ok && cell_ok;
  }
  const double total = seconds_since(t0);
  note("slowest run " + fmt(worst_secs) + " s, total " + fmt(total) + " s");
  if (id == 1) ok = ok && worst_secs < 10.0 && total < 600.0;
  verdict(id, ok,
          std::string(to_string(method)) + " phase cells on B->A, median of 5 seeds");
}

// ---- 3 -------------------------------------------------------------------------

void baseline_failure(const Synthetic& d) {
  const BiasAudit audit = audit_bias(d.b_raw);
  bool ok = audit.separator_found && !audit.degenerate_labels;
  note("audit on B: feature '" + audit.feature + "' -> " + audit.label);
  for (auto seed : kSeeds) {
    const Run r = run_once(d, Method::kBaseline, 0, 0, seed);
    const auto pred = predict_batch(r.params, d.test);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < d.test.size(); ++i) {
      const std::string rule = apply_bias_rule(audit, d.a.examples[i].hypothesis, d.labels);
      agree += rule == d.labels[static_cast<std::size_t>(pred[i])];
    }
    const double agreement = static_cast<double>(agree) / static_cast<double>(d.test.size());
    const bool run_ok = r.train_acc == 1.0 && r.test_acc >= 0.45 && r.test_acc <= 0.55 &&
                        agreement >= 0.99;
    note("seed " + std::to_string(seed) + ": train " + fmt(r.train_acc) + ", test " +
         fmt(r.test_acc) + ", agreement with presence rule " + fmt(agreement) +
         (run_ok ? " ok" : " MISS"));
    ok = ok && run_ok;
  }
  verdict(3, ok, "baseline learns B, scores ~0.5 on A and follows the c-presence rule");
}

// ---- 4 -------------------------------------------------------------------------

constexpr ParamGroup kGroups[] = {ParamGroup::kPremiseEncoder, ParamGroup::kHypothesisEncoder,
                                  ParamGroup::kClassifier, ParamGroup::kHypothesisHead};

void gradient_suite() {
  struct Objective {
    Method method;
    Routing routing;
  };
  const Objective objectives[] = {{Method::kBaseline, Routing::kReversal},
                                  {Method::kMethod1, Routing::kReversal},
                                  {Method::kMethod1, Routing::kLiteral},
                                  {Method::kMethod2, Routing::kReversal},
                                  {Method::kMethod2, Routing::kLiteral}};
  bool ok = true;
  for (const auto& o : objectives) {
    double worst_group = 0.0, worst_coord = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      auto in = testutil::random_instance(o.method, o.routing,
                                          1000 + static_cast<std::uint64_t>(trial), 8);
      const Gradients g = objective_gradients(in.cfg, in.m, in.batch, in.swaps);
      for (auto group : kGroups) {
        const auto numeric = ref::numeric_gradient(in.m, group, in.cfg, in.batch, in.swaps);
        double diff = 0.0, an = 0.0, nu = 0.0;
        for (const auto& p : in.m.params) {
          if (p.group() != group) continue;
          const Tensor& a = g.at(p.id());
          const auto& n = numeric.at(p.name());
          for (std::size_t i = 0; i < a.size(); ++i) {
            const double nd = static_cast<double>(n[i]);
            diff += (a[i] - nd) * (a[i] - nd);
            an += a[i] * a[i];
            nu += nd * nd;
            worst_coord = std::max(
                worst_coord, std::fabs(a[i] - nd) / std::max(std::fabs(a[i]) + std::fabs(nd), 1e-6));
          }
        }
        const double rel = std::sqrt(diff) / std::max(1e-12, std::sqrt(an) + std::sqrt(nu));
        worst_group = std::max(worst_group, rel);
      }
    }
    const bool obj_ok = worst_group < 1e-6 && worst_coord < 1e-6;
    note(std::string(to_string(o.method)) + "/" + std::string(to_string(o.routing)) +
         ": worst group rel error " + fmt(worst_group) + ", worst coordinate " +
         fmt(worst_coord) + (obj_ok ? " ok" : " MISS"));
    ok = ok && obj_ok;
  }
  verdict(4, ok, "routed gradients match central differences of each group's objective (< 1e-6)");
}

// ---- 5 -------------------------------------------------------------------------

void reductions() {
  bool ok = true;
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (auto routing : {Routing::kReversal, Routing::kLiteral}) {
      auto in = testutil::random_instance(Method::kMethod2, routing, seed, 8);
      TrainConfig base, c1, c2;
      c1.method = Method::kMethod1;
      c1.routing = routing;
      c2.method = Method::kMethod2;
      c2.routing = routing;
      c2.beta = in.cfg.beta;
      Tape tb, t1, t2;
      const double lb = loss_baseline(tb, in.m, in.batch).main;
      const double l1 = loss_method1(t1, in.m, in.batch, 0.0, 0.0, routing).main;
      const double l2 = loss_method2(t2, in.m, in.batch, {}, 0.0, in.cfg.beta, routing).main;
      bool same = same_bits(lb, l1) && same_bits(lb, l2);
      for (auto group : kGroups) {
        const double ob = group_objective(group, base, in.m, in.batch, {});
        same = same && same_bits(ob, group_objective(group, c1, in.m, in.batch, {})) &&
               same_bits(ob, group_objective(group, c2, in.m, in.batch, {}));
      }
      const Gradients gb = objective_gradients(base, in.m, in.batch, {});
      same = same && same_bits(gb, objective_gradients(c1, in.m, in.batch, {})) &&
             same_bits(gb, objective_gradients(c2, in.m, in.batch, {}));
      ok = ok && same;
      ++checked;
    }
  }
  note(std::to_string(checked) + " instances, losses, per-group objectives and every gradient compared with memcmp");
  verdict(5, ok, "method1(0,0) and method2(0) reproduce baseline loss and gradients bitwise");
}

// ---- 6 -------------------------------------------------------------------------

// Gradients of the hypothesis-only branch exactly as the objectives build it,
// with the reversal node either present (scale s) or replaced by identity.
Gradients adversarial_branch(const ModelParams& m, std::span<const IndexedExample> batch,
                             double weight, double head_factor, double reverse_scale,
                             bool reversed) {
  Tape tape;
  TokenBatch hyps;
  std::vector<int> labels;
  for (const auto& ex : batch) {
    hyps.push_back(ex.hypothesis);
    labels.push_back(ex.label);
  }
  Var v = encode_batch(tape, m, Side::kHypothesis, hyps);
  Var in = reversed ? grad_reverse(v, reverse_scale) : v;
  Var adv = mean(nll(hypothesis_head(tape, m, in, head_factor), labels));
  return tape.backward(scale(adv, weight));
}

void routing_invariants() {
  bool m1_exact = true, m1_library = true, m2_ok = true;
  double worst_lib = 0.0;
  const double pow2[] = {0.25, 0.5, 1.0, 2.0, 4.0};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto in = testutil::random_instance(Method::kMethod1, Routing::kLiteral, seed, 8);
    for (double a : pow2) {
      for (double b : pow2) {
        // literal: encoder side of the adversary is -alpha x unreversed
        const Gradients lit = adversarial_branch(in.m, in.batch, 1.0, b, a, true);
        const Gradients lit_id = adversarial_branch(in.m, in.batch, 1.0, b, a, false);
        // reversal: alpha-weighted term, reversal layer scaled by beta
        const Gradients rev = adversarial_branch(in.m, in.batch, a, 1.0, b, true);
        const Gradients rev_id = adversarial_branch(in.m, in.batch, a, 1.0, b, false);
        for (const auto& p : in.m.params) {
          if (p.group() != ParamGroup::kHypothesisEncoder) continue;
          const Tensor &gl = lit.at(p.id()), &gl0 = lit_id.at(p.id());
          const Tensor &gr = rev.at(p.id()), &gr0 = rev_id.at(p.id());
          for (std::size_t i = 0; i < gl.size(); ++i) {
            m1_exact = m1_exact && gl[i] == -a * gl0[i] && gr[i] == -b * gr0[i];
          }
        }
      }
    }
    // Library objective: hyp encoder = main - k * adversary, head untouched by main.
    for (auto routing : {Routing::kLiteral, Routing::kReversal}) {
      const double a = in.cfg.alpha, b = in.cfg.beta;
      TrainConfig c;
      c.method = Method::kMethod1;
      c.alpha = a;
      c.beta = b;
      c.routing = routing;
      TrainConfig base, probe;
      probe.method = Method::kHypothesisOnly;
      const Gradients g = objective_gradients(c, in.m, in.batch, {});
      const Gradients main = objective_gradients(base, in.m, in.batch, {});
      const Gradients adv = objective_gradients(probe, in.m, in.batch, {});
      const double k = routing == Routing::kLiteral ? a : a * b;
      for (const auto& p : in.m.params) {
        if (p.group() != ParamGroup::kHypothesisEncoder) continue;
        for (std::size_t i = 0; i < g.at(p.id()).size(); ++i) {
          const double want = main.at(p.id())[i] - k * adv.at(p.id())[i];
          const double err = std::fabs(g.at(p.id())[i] - want) / std::max(1.0, std::fabs(want));
          worst_lib = std::max(worst_lib, err);
        }
      }
    }
  }
  m1_library = worst_lib < 1e-13;

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (auto routing : {Routing::kReversal, Routing::kLiteral}) {
      auto in = testutil::random_instance(Method::kMethod2, routing, seed, 8);
      const Gradients g = objective_gradients(in.cfg, in.m, in.batch, in.swaps);
      auto moved = in.swaps;
      for (auto& s : moved) s.premise = {4, 4, 3};
      const Gradients g_moved = objective_gradients(in.cfg, in.m, in.batch, moved);
      // every row swapped: nothing may reach the premise encoder
      TrainConfig all = in.cfg;
      all.alpha = 1.0;
      std::vector<PremiseSwap> every;
      for (std::size_t i = 0; i < in.batch.size(); ++i) {
        every.push_back({i, in.batch[(i + 1) % in.batch.size()].premise});
      }
      const Gradients g_all = objective_gradients(all, in.m, in.batch, every);
      for (const auto& p : in.m.params) {
        if (p.group() != ParamGroup::kPremiseEncoder) continue;
        m2_ok = m2_ok && same_bits(g.at(p.id()), g_moved.at(p.id()));
        for (double x : g_all.at(p.id()).data()) m2_ok = m2_ok && x == 0.0;
      }
    }
  }
  note(std::string("method1 hyp-encoder adversarial gradient == -alpha (literal) / -beta of the "
                   "alpha-weighted term (reversal) x unreversed, exact at power-of-two scales: ") +
       (m1_exact ? "ok" : "MISS"));
  note("method1 library objective vs main - k * adversary, worst rel " + fmt(worst_lib) +
       (m1_library ? " ok" : " MISS"));
  note(std::string("method2 premise gradient: all-swapped batch exactly zero, donor-invariant "
                   "bitwise: ") +
       (m2_ok ? "ok" : "MISS"));
  verdict(6, m1_exact && m1_library && m2_ok, "routing invariants of both methods");
}

// ---- 7 -------------------------------------------------------------------------

void probe(const Synthetic& d) {
  TrainConfig cfg;
  const ProbeResult on_b = hypothesis_only_probe(d.train, d.train, d.spec, d.vocab.size(), cfg);
  const ProbeResult on_a = hypothesis_only_probe(d.train, d.test, d.spec, d.vocab.size(), cfg);
  note("probe B->B " + fmt(on_b.accuracy) + ", B->A " + fmt(on_a.accuracy) +
       " (majority baseline " + fmt(on_a.majority_baseline) + ")");
  verdict(7, on_b.accuracy == 1.0 && std::fabs(on_a.accuracy - 0.5) <= 0.05,
          "hypothesis-only probe: 1.0 on B, 0.5 +- 0.05 on A");
}

// ---- 8 -------------------------------------------------------------------------

void learning_curve_properties() {
  bool nested = true;
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t pool = 1 + rng() % 200;
    std::vector<std::size_t> sizes{0};
    while (sizes.back() < pool) {
      const std::size_t next = sizes.back() + 1 + rng() % (pool / 3 + 1);
      if (next > pool) break;
      sizes.push_back(next);
    }
    const auto subsets = nested_subsets(pool, sizes, rng());
    for (std::size_t i = 0; i < subsets.size(); ++i) {
      nested = nested && subsets[i].size() == sizes[i];
      if (i > 0) {
        nested = nested &&
                 std::equal(subsets[i - 1].begin(), subsets[i - 1].end(), subsets[i].begin());
      }
      std::vector<std::size_t> sorted = subsets[i];
      std::sort(sorted.begin(), sorted.end());
      nested = nested && std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end() &&
               (sorted.empty() || sorted.back() < pool);
    }
  }

  const auto b = testutil::synth_rows(SynthVariant::kB, 200, 31);
  const auto target_train = testutil::synth_rows(SynthVariant::kA, 100, 32);
  const auto target_dev = testutil::synth_rows(SynthVariant::kA, 100, 33);
  TrainConfig pre_cfg;
  pre_cfg.max_epochs = 300;
  std::vector<std::pair<std::string, ModelParams>> pretrained;
  pretrained.emplace_back("baseline", train(testutil::synth_model(1), b, {}, pre_cfg).params);
  pre_cfg.method = Method::kMethod1;
  pre_cfg.alpha = 1.0;
  pre_cfg.beta = 4.0;
  pretrained.emplace_back("method1", train(testutil::synth_model(1), b, {}, pre_cfg).params);

  TrainConfig ft;
  ft.max_epochs = 100;
  const std::vector<std::size_t> sizes{0, 10, 50, 100};
  const LearningCurve c1 = learning_curve(pretrained, target_train, target_dev, sizes, ft);
  const LearningCurve c2 = learning_curve(pretrained, target_train, target_dev, sizes, ft);
  bool zero_shot = c1.rows.size() == 3 && c1.rows.back().first == "scratch";
  for (std::size_t i = 0; i < pretrained.size() && zero_shot; ++i) {
    zero_shot = c1.rows[i].second[0] == accuracy(pretrained[i].second, target_dev);
  }
  const bool deterministic = c1.rows == c2.rows && c1.subsets == c2.subsets;
  note(std::string("nested subsets: ") + (nested ? "ok" : "MISS") +
       ", size 0 equals zero-shot: " + (zero_shot ? "ok" : "MISS") +
       ", repeat run identical: " + (deterministic ? "ok" : "MISS"));
  verdict(8, nested && zero_shot && deterministic,
          "learning-curve harness properties on synthetic data");
}

}  // namespace

// Optional arguments select criteria by number; default is all of them.
int main(int argc, char** argv) {
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 128 << 20);

  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  auto want = [&](int id) { return only.empty() || only.count(id) > 0; };

  const Synthetic d;
  using P = PhaseCell;
  if (want(1)) {
    phase_table(1, d, Method::kMethod1,
                {{1, 4, P::kHigh}, {5, 2, P::kHigh}, {0.25, 3, P::kHigh},
                 {0.1, 1, P::kLow}, {1, 0.5, P::kLow}, {5, 0.1, P::kLow}});
  }
  if (want(2)) {
    phase_table(2, d, Method::kMethod2,
                {{0.5, 3, P::kHigh}, {0.25, 4, P::kHigh}, {0.1, 1, P::kLow},
                 {1.0, 20, P::kUnlearned}});
  }
  if (want(3)) baseline_failure(d);
  if (want(4)) gradient_suite();
  if (want(5)) reductions();
  if (want(6)) routing_invariants();
  if (want(7)) probe(d);
  if (want(8)) learning_curve_properties();

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) +
                                                            " criterion(s) failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
