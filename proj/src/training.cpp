#include "debias/training.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

#include "debias/error.hpp"

namespace debias {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kBaseline: return "baseline";
    case Method::kMethod1: return "method1";
    case Method::kMethod2: return "method2";
    case Method::kHypothesisOnly: return "hyp_only";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  for (auto m : {Method::kBaseline, Method::kMethod1, Method::kMethod2,
                 Method::kHypothesisOnly}) {
    if (to_string(m) == text) return m;
  }
  throw UsageError("unknown method '" + std::string(text) + "'");
}

std::string_view to_string(StopRule r) {
  return r == StopRule::kConverge ? "converge" : "max_epochs";
}

StopRule parse_stop_rule(std::string_view text) {
  if (text == "converge") return StopRule::kConverge;
  if (text == "max_epochs") return StopRule::kMaxEpochs;
  throw UsageError("unknown stop rule '" + std::string(text) + "'");
}

std::string_view to_string(Routing r) {
  return r == Routing::kReversal ? "reversal" : "literal";
}

Routing parse_routing(std::string_view text) {
  if (text == "reversal") return Routing::kReversal;
  if (text == "literal") return Routing::kLiteral;
  throw UsageError("unknown routing '" + std::string(text) + "'");
}

void TrainConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw UsageError("alpha must be a finite non-negative number");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw UsageError("beta must be a finite non-negative number");
  }
  if (method == Method::kMethod2 && alpha > 1.0) {
    throw UsageError("method2 needs 0 <= alpha <= 1, got " + std::to_string(alpha));
  }
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    throw UsageError("lr must be a finite non-negative number");
  }
  if (!(clip_norm >= 0.0)) throw UsageError("clip_norm must be non-negative");
  if (max_epochs < 0) throw UsageError("max_epochs must be non-negative");
  if (acc_streak < 0) throw UsageError("acc_streak must be non-negative");
  if (!(loss_tol >= 0.0)) throw UsageError("loss_tol must be non-negative");
  if (eval_each < 1) throw UsageError("eval_each must be positive");
}

std::string TrainConfig::to_config_text() const {
  auto num = [](double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  };
  std::ostringstream out;
  out << "method=" << to_string(method) << '\n'
      << "alpha=" << num(alpha) << '\n'
      << "beta=" << num(beta) << '\n'
      << "routing=" << to_string(routing) << '\n'
      << "lr=" << num(lr) << '\n'
      << "clip_norm=" << num(clip_norm) << '\n'
      << "max_epochs=" << max_epochs << '\n'
      << "batch_size=" << batch_size << '\n'
      << "seed=" << seed << '\n'
      << "stop=" << to_string(stop) << '\n'
      << "acc_streak=" << acc_streak << '\n'
      << "loss_tol=" << num(loss_tol) << '\n'
      << "eval_each=" << eval_each << '\n';
  return out.str();
}

namespace {

double parse_double(std::string_view key, std::string_view value) {
  const std::string s(value);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') {
    throw UsageError("bad number for " + std::string(key) + ": '" + s + "'");
  }
  return v;
}

long long parse_int(std::string_view key, std::string_view value) {
  const std::string s(value);
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0') {
    throw UsageError("bad integer for " + std::string(key) + ": '" + s + "'");
  }
  return v;
}

}  // namespace

bool apply_config_value(TrainConfig& cfg, std::string_view key,
                        std::string_view value) {
  if (key == "method") cfg.method = parse_method(value);
  else if (key == "alpha") cfg.alpha = parse_double(key, value);
  else if (key == "beta") cfg.beta = parse_double(key, value);
  else if (key == "routing") cfg.routing = parse_routing(value);
  else if (key == "lr") cfg.lr = parse_double(key, value);
  else if (key == "clip_norm") cfg.clip_norm = parse_double(key, value);
  else if (key == "max_epochs") cfg.max_epochs = static_cast<int>(parse_int(key, value));
  else if (key == "batch_size") cfg.batch_size = static_cast<std::size_t>(parse_int(key, value));
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "stop") cfg.stop = parse_stop_rule(value);
  else if (key == "acc_streak") cfg.acc_streak = static_cast<int>(parse_int(key, value));
  else if (key == "loss_tol") cfg.loss_tol = parse_double(key, value);
  else if (key == "eval_each") cfg.eval_each = static_cast<int>(parse_int(key, value));
  else return false;
  return true;
}

void write_report_csv(std::ostream& out, const TrainReport& report) {
  const auto old = out.precision(17);
  out << "epoch,main_loss,adv_loss,train_acc\n";
  for (const auto& e : report.epochs) {
    out << e.epoch << ',' << e.main_loss << ',' << e.adv_loss << ','
        << e.train_acc << '\n';
  }
  out.precision(old);
}

// ---- objectives ------------------------------------------------------------------

namespace {

struct BatchTokens {
  TokenBatch premises;
  TokenBatch hypotheses;
  std::vector<int> labels;
};

BatchTokens gather(std::span<const IndexedExample> batch) {
  BatchTokens t;
  for (const auto& ex : batch) {
    t.premises.push_back(ex.premise);
    t.hypotheses.push_back(ex.hypothesis);
    t.labels.push_back(ex.label);
  }
  return t;
}

void require_batch(std::span<const IndexedExample> batch, const char* who) {
  if (batch.empty()) throw UsageError(std::string(who) + ": empty batch");
}

}  // namespace

LossTerms loss_baseline(Tape& tape, const ModelParams& m,
                        std::span<const IndexedExample> batch) {
  require_batch(batch, "loss_baseline");
  const BatchTokens t = gather(batch);
  Var u = encode_batch(tape, m, Side::kPremise, t.premises);
  Var v = encode_batch(tape, m, Side::kHypothesis, t.hypotheses);
  Var main = mean(nll(classify(tape, m, combine(u, v, m.spec.combine)), t.labels));
  return LossTerms{main, main.value().item(), 0.0};
}

LossTerms loss_method1(Tape& tape, const ModelParams& m,
                       std::span<const IndexedExample> batch, double alpha,
                       double beta, Routing routing) {
  require_batch(batch, "loss_method1");
  if (!(alpha >= 0.0) || !(beta >= 0.0)) {
    throw UsageError("loss_method1: alpha and beta must be non-negative");
  }
  const BatchTokens t = gather(batch);
  Var u = encode_batch(tape, m, Side::kPremise, t.premises);
  Var v = encode_batch(tape, m, Side::kHypothesis, t.hypotheses);
  Var main = mean(nll(classify(tape, m, combine(u, v, m.spec.combine)), t.labels));
  if (routing == Routing::kLiteral) {
    // Encoder ascends alpha * NLL_phi, head weights take beta-scaled steps.
    Var adv = mean(nll(hypothesis_head(tape, m, grad_reverse(v, alpha), beta),
                       t.labels));
    return LossTerms{add(main, adv), main.value().item(), adv.value().item()};
  }
  Var adv = mean(nll(hypothesis_head(tape, m, grad_reverse(v, beta)), t.labels));
  return LossTerms{add(main, scale(adv, alpha)), main.value().item(),
                   adv.value().item()};
}

std::vector<SwapRecord> select_swaps(std::span<const std::size_t> batch_ids,
                                     std::size_t pool_size, double alpha,
                                     int epoch, std::mt19937_64& rng) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw UsageError("select_swaps: alpha must lie in [0, 1]");
  }
  const std::size_t n = batch_ids.size();
  // Tolerance keeps e.g. 0.29 * 100 from flooring to 28.
  const auto count = static_cast<std::size_t>(
      std::floor(alpha * static_cast<double>(n) + 1e-9));
  if (count > 0 && pool_size < 2) {
    throw UsageError("select_swaps: need at least two training examples");
  }
  std::vector<std::size_t> positions(n);
  for (std::size_t i = 0; i < n; ++i) positions[i] = i;
  std::shuffle(positions.begin(), positions.end(), rng);
  positions.resize(count);
  std::sort(positions.begin(), positions.end());

  std::vector<SwapRecord> out;
  out.reserve(count);
  for (std::size_t pos : positions) {
    const std::size_t self = batch_ids[pos];
    std::uniform_int_distribution<std::size_t> pick(0, pool_size - 2);
    std::size_t donor = pick(rng);
    if (donor >= self) ++donor;
    out.push_back(SwapRecord{self, donor, epoch});
  }
  return out;
}

std::vector<PremiseSwap> resolve_swaps(std::span<const SwapRecord> records,
                                       std::span<const std::size_t> batch_ids,
                                       std::span<const IndexedExample> pool) {
  std::vector<PremiseSwap> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    auto it = std::find(batch_ids.begin(), batch_ids.end(), r.example);
    if (it == batch_ids.end() || r.donor >= pool.size() || r.donor == r.example) {
      throw UsageError("resolve_swaps: inconsistent swap record");
    }
    out.push_back(PremiseSwap{static_cast<std::size_t>(it - batch_ids.begin()),
                              pool[r.donor].premise});
  }
  return out;
}

namespace {

struct SwapSplit {
  std::vector<IndexedExample> real;
  std::vector<IndexedExample> swapped;  // premise already replaced
};

SwapSplit split_swaps(std::span<const IndexedExample> batch,
                      std::span<const PremiseSwap> swaps) {
  std::vector<const PremiseSwap*> at(batch.size(), nullptr);
  for (const auto& s : swaps) {
    if (s.position >= batch.size() || at[s.position]) {
      throw UsageError("loss_method2: bad or duplicate swap position");
    }
    if (s.premise.empty()) throw UsageError("loss_method2: empty replacement premise");
    at[s.position] = &s;
  }
  SwapSplit out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (at[i]) {
      IndexedExample ex = batch[i];
      ex.premise = at[i]->premise;
      out.swapped.push_back(std::move(ex));
    } else {
      out.real.push_back(batch[i]);
    }
  }
  return out;
}

}  // namespace

LossTerms loss_method2(Tape& tape, const ModelParams& m,
                       std::span<const IndexedExample> batch,
                       std::span<const PremiseSwap> swaps, double alpha,
                       double beta, Routing routing) {
  require_batch(batch, "loss_method2");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw UsageError("loss_method2: alpha must lie in [0, 1], got " +
                     std::to_string(alpha));
  }
  if (!(beta >= 0.0)) throw UsageError("loss_method2: beta must be non-negative");
  const SwapSplit split = split_swaps(batch, swaps);
  const double n = static_cast<double>(batch.size());

  const bool literal = routing == Routing::kLiteral;

  LossTerms out;
  std::vector<Var> terms;
  if (!split.real.empty()) {
    const BatchTokens t = gather(split.real);
    Var u = encode_batch(tape, m, Side::kPremise, t.premises);
    Var v = encode_batch(tape, m, Side::kHypothesis, t.hypotheses);
    Var nll_real = mean(nll(classify(tape, m, combine(u, v, m.spec.combine)), t.labels));
    out.main = nll_real.value().item();
    // Per-example weight 1/n, or (1 - alpha)/n for literal routing; the
    // factor is exactly 1 when nothing is swapped.
    const double w = static_cast<double>(split.real.size()) / n;
    terms.push_back(scale(nll_real, literal ? (1.0 - alpha) * w : w));
  }
  if (!split.swapped.empty()) {
    const BatchTokens t = gather(split.swapped);
    Var u = grad_block(encode_batch(tape, m, Side::kPremise, t.premises));
    Var v = grad_reverse(encode_batch(tape, m, Side::kHypothesis, t.hypotheses),
                         literal ? alpha : beta);
    Var nll_swapped = mean(nll(
        classify(tape, m, combine(u, v, m.spec.combine), literal ? beta : 1.0),
        t.labels));
    out.adv = nll_swapped.value().item();
    terms.push_back(scale(nll_swapped, static_cast<double>(split.swapped.size()) / n));
  }
  out.root = terms.size() == 1 ? terms[0] : add(terms[0], terms[1]);
  return out;
}

LossTerms loss_hypothesis_only(Tape& tape, const ModelParams& m,
                               std::span<const IndexedExample> batch) {
  require_batch(batch, "loss_hypothesis_only");
  const BatchTokens t = gather(batch);
  Var v = encode_batch(tape, m, Side::kHypothesis, t.hypotheses);
  Var adv = mean(nll(hypothesis_head(tape, m, v), t.labels));
  return LossTerms{adv, 0.0, adv.value().item()};
}

namespace {

LossTerms build_objective(Tape& tape, const TrainConfig& cfg,
                          const ModelParams& m,
                          std::span<const IndexedExample> batch,
                          std::span<const PremiseSwap> swaps) {
  switch (cfg.method) {
    case Method::kBaseline: return loss_baseline(tape, m, batch);
    case Method::kMethod1:
      return loss_method1(tape, m, batch, cfg.alpha, cfg.beta, cfg.routing);
    case Method::kMethod2:
      return loss_method2(tape, m, batch, swaps, cfg.alpha, cfg.beta, cfg.routing);
    case Method::kHypothesisOnly: return loss_hypothesis_only(tape, m, batch);
  }
  throw UsageError("unknown method");
}

// Per-row NLL of the full model and of the hypothesis-only head.
std::vector<double> row_nll(const Tensor& log_probs, std::span<const int> labels) {
  std::vector<double> out(labels.size());
  const std::size_t cols = log_probs.cols();
  for (std::size_t r = 0; r < labels.size(); ++r) {
    out[r] = -log_probs[r * cols + labels[r]];
  }
  return out;
}

double total(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

double group_objective(ParamGroup group, const TrainConfig& cfg,
                       const ModelParams& m,
                       std::span<const IndexedExample> batch,
                       std::span<const PremiseSwap> swaps) {
  require_batch(batch, "group_objective");
  const double n = static_cast<double>(batch.size());
  auto main_nll = [&](std::span<const IndexedExample> rows) {
    if (rows.empty()) return 0.0;
    Tape tape;
    const BatchTokens t = gather(rows);
    return total(row_nll(forward_log_probs(tape, m, rows).value(), t.labels));
  };
  auto head_nll = [&](std::span<const IndexedExample> rows) {
    Tape tape;
    const BatchTokens t = gather(rows);
    Var v = encode_batch(tape, m, Side::kHypothesis, t.hypotheses);
    return total(row_nll(hypothesis_head(tape, m, v).value(), t.labels));
  };

  const double a = cfg.alpha, b = cfg.beta;
  const bool literal = cfg.routing == Routing::kLiteral;
  switch (cfg.method) {
    case Method::kBaseline:
      return is_theta(group) ? main_nll(batch) / n : 0.0;
    case Method::kMethod1:
      if (literal) {
        if (is_theta(group)) return main_nll(batch) / n - a * head_nll(batch) / n;
        return b * head_nll(batch) / n;
      }
      switch (group) {
        case ParamGroup::kPremiseEncoder:
        case ParamGroup::kClassifier:
          return main_nll(batch) / n;
        case ParamGroup::kHypothesisEncoder:
          return main_nll(batch) / n - a * b * head_nll(batch) / n;
        case ParamGroup::kHypothesisHead:
          return a * head_nll(batch) / n;
      }
      break;
    case Method::kMethod2: {
      const SwapSplit split = split_swaps(batch, swaps);
      const double real = main_nll(split.real);
      const double swapped = main_nll(split.swapped);
      if (!literal) {
        switch (group) {
          case ParamGroup::kPremiseEncoder: return real / n;
          case ParamGroup::kHypothesisEncoder: return real / n - b * swapped / n;
          case ParamGroup::kClassifier: return (real + swapped) / n;
          case ParamGroup::kHypothesisHead: return 0.0;
        }
        break;
      }
      switch (group) {
        case ParamGroup::kPremiseEncoder:
          return (1.0 - cfg.alpha) * real / n;
        case ParamGroup::kHypothesisEncoder:
          return (1.0 - cfg.alpha) * real / n - cfg.alpha * swapped / n;
        case ParamGroup::kClassifier:
          return (1.0 - cfg.alpha) * real / n + cfg.beta * swapped / n;
        case ParamGroup::kHypothesisHead:
          return 0.0;
      }
      break;
    }
    case Method::kHypothesisOnly:
      if (group == ParamGroup::kHypothesisEncoder ||
          group == ParamGroup::kHypothesisHead) {
        return head_nll(batch) / n;
      }
      return 0.0;
  }
  throw UsageError("unknown method");
}

Gradients objective_gradients(const TrainConfig& cfg, const ModelParams& m,
                              std::span<const IndexedExample> batch,
                              std::span<const PremiseSwap> swaps) {
  Tape tape;
  LossTerms terms = build_objective(tape, cfg, m, batch, swaps);
  Gradients g = tape.backward(terms.root);
  // Parameters the objective never touched still get an explicit zero.
  for (const auto& p : m.params) {
    g.try_emplace(p.id(), Tensor::zeros_like(p.value));
  }
  return g;
}

std::map<ParamGroup, GradCheckResult> check_gradients(
    const TrainConfig& cfg, ModelParams& m,
    std::span<const IndexedExample> batch, std::span<const PremiseSwap> swaps,
    double epsilon) {
  const Gradients analytic = objective_gradients(cfg, m, batch, swaps);
  std::map<ParamGroup, GradCheckResult> out;
  for (auto g : {ParamGroup::kPremiseEncoder, ParamGroup::kHypothesisEncoder,
                 ParamGroup::kClassifier, ParamGroup::kHypothesisHead}) {
    auto params = m.group(g);
    auto objective = [&] { return group_objective(g, cfg, m, batch, swaps); };
    out[g] = finite_diff_check(objective, params, analytic, epsilon);
  }
  return out;
}

// ---- training loop -----------------------------------------------------------------

double accuracy(const ModelParams& m, std::span<const IndexedExample> data,
                bool hypothesis_only) {
  if (data.empty()) return 0.0;
  const auto pred = hypothesis_only ? predict_hypothesis_only(m, data)
                                    : predict_batch(m, data);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) hits += pred[i] == data[i].label;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

double evaluate(const ModelParams& m, const Vocabulary& vocab,
                const Dataset& data, const LabelMap& label_map) {
  if (label_map.source_space() != m.spec.labels) {
    throw UsageError("evaluate: label map source space differs from model labels");
  }
  if (data.examples.empty()) return 0.0;
  std::vector<IndexedExample> rows;
  rows.reserve(data.examples.size());
  for (const auto& ex : data.examples) {
    rows.push_back(IndexedExample{vocab.encode(ex.premise),
                                  vocab.encode(ex.hypothesis), 0});
  }
  const auto pred = predict_batch(m, rows);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    hits += label_map.apply(m.spec.labels[pred[i]]) == data.examples[i].label;
  }
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

namespace {

std::string describe(const TrainConfig& cfg) {
  std::ostringstream out;
  out << "method=" << to_string(cfg.method) << " alpha=" << cfg.alpha
      << " beta=" << cfg.beta << " lr=" << cfg.lr << " seed=" << cfg.seed;
  return out.str();
}

}  // namespace

TrainResult train(ModelParams m, std::span<const IndexedExample> train_set,
                  std::span<const IndexedExample> dev, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.empty()) throw UsageError("train: empty training set");
  const int labels = static_cast<int>(m.spec.labels.size());
  for (auto span : {train_set, dev}) {
    for (const auto& ex : span) {
      if (ex.label < 0 || ex.label >= labels) {
        throw UsageError("train: example label outside the model's label space");
      }
    }
  }
  const bool hyp_only = cfg.method == Method::kHypothesisOnly;
  const bool dev_is_train = dev.data() == train_set.data() && dev.size() == train_set.size();
  const std::size_t n = train_set.size();
  const std::size_t bs = cfg.batch_size == 0 ? n : std::min(cfg.batch_size, n);

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  TrainResult result{m, {}};
  TrainReport& report = result.report;
  if (!dev.empty()) {
    report.best_dev_acc = accuracy(m, dev, hyp_only);
    report.best_epoch = 0;
  }

  std::vector<IndexedExample> batch_buf;
  int streak = 0;
  double prev_objective = std::nan("");
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    if (bs < n) std::shuffle(order.begin(), order.end(), rng);
    double sum_main = 0.0, sum_adv = 0.0, sum_obj = 0.0;
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t len = std::min(bs, n - start);
      std::span<const std::size_t> ids(order.data() + start, len);
      std::span<const IndexedExample> batch;
      if (bs == n) {
        batch = train_set;  // natural order, no copy
      } else {
        batch_buf.clear();
        for (std::size_t id : ids) batch_buf.push_back(train_set[id]);
        batch = batch_buf;
      }
      std::vector<PremiseSwap> swaps;
      if (cfg.method == Method::kMethod2) {
        const auto records = select_swaps(ids, n, cfg.alpha, epoch, rng);
        report.swaps += records.size();
        swaps = resolve_swaps(records, ids, train_set);
      }
      Tape tape;
      LossTerms terms = build_objective(tape, cfg, m, batch, swaps);
      const double objective = terms.root.value().item();
      if (!std::isfinite(objective)) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch) +
                             " (" + describe(cfg) + "): loss is not finite");
      }
      const Gradients grads = tape.backward(terms.root);
      double step = cfg.lr;
      if (cfg.clip_norm > 0.0) {
        double sq = 0.0;
        for (const auto& [id, g] : grads) {
          for (double x : g.data()) sq += x * x;
        }
        const double norm = std::sqrt(sq);
        if (norm > cfg.clip_norm) step *= cfg.clip_norm / norm;
      }
      for (auto& p : m.params) {
        auto it = grads.find(p.id());
        if (it == grads.end()) continue;
        const Tensor& g = it->second;
        for (std::size_t i = 0; i < g.size(); ++i) p.value[i] -= step * g[i];
      }
      const double w = static_cast<double>(len);
      sum_main += terms.main * w;
      sum_adv += terms.adv * w;
      sum_obj += objective * w;
    }
    for (const auto& p : m.params) {
      if (!p.value.all_finite()) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch) +
                             " (" + describe(cfg) + "): parameter " + p.name() +
                             " is not finite");
      }
    }
    const double dn = static_cast<double>(n);
    EpochStats stats{epoch, sum_main / dn, sum_adv / dn, accuracy(m, train_set, hyp_only)};
    report.epochs.push_back(stats);
    report.epochs_run = epoch;

    bool stop = false;
    if (cfg.stop == StopRule::kConverge) {
      streak = stats.train_acc == 1.0 ? streak + 1 : 0;
      const double obj = sum_obj / dn;
      if ((cfg.acc_streak > 0 && streak >= cfg.acc_streak) ||
          (std::isfinite(prev_objective) && std::fabs(obj - prev_objective) < cfg.loss_tol)) {
        stop = true;
        report.converged = true;
      }
      prev_objective = obj;
    }
    const bool last = stop || epoch == cfg.max_epochs;
    if (!dev.empty() && (epoch % cfg.eval_each == 0 || last)) {
      const double acc = dev_is_train ? stats.train_acc : accuracy(m, dev, hyp_only);
      if (acc >= report.best_dev_acc) {
        report.best_dev_acc = acc;
        report.best_epoch = epoch;
        result.params = m;
      }
    }
    if (stop) break;
  }
  if (dev.empty()) {
    result.params = std::move(m);
    report.best_epoch = report.epochs_run;
  }
  return result;
}

TrainResult fine_tune(const ModelParams& pretrained,
                      std::span<const IndexedExample> subset, TrainConfig cfg) {
  if (subset.empty()) return TrainResult{pretrained, {}};
  cfg.method = Method::kBaseline;
  return train(pretrained, subset, subset, cfg);
}

}  // namespace debias
