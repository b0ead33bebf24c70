#include "debias/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "debias/error.hpp"
#include "debias/synthetic.hpp"

namespace debias {

std::vector<double> synthetic_alphas(Method method) {
  if (method == Method::kMethod2) return {0.1, 0.25, 0.5, 0.75, 1.0};
  return {0.1, 0.25, 0.5, 1.0, 2.5, 5.0};
}

std::vector<double> synthetic_betas() {
  return {0.1, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 10.0, 20.0};
}

std::vector<double> stronger_range() {
  return {1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0};
}

void SweepGrid::validate() const {
  if (alphas.empty() || betas.empty() || seeds.empty()) {
    throw UsageError("sweep grid needs at least one alpha, beta and seed");
  }
  for (double a : alphas) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw UsageError("sweep alpha must be finite and non-negative");
    }
    if (method == Method::kMethod2 && a > 1.0) {
      throw UsageError("method2 sweep alpha must lie in [0, 1], got " + format_number(a));
    }
  }
  for (double b : betas) {
    if (!(b >= 0.0) || !std::isfinite(b)) {
      throw UsageError("sweep beta must be finite and non-negative");
    }
  }
  if (train.empty()) throw UsageError("sweep grid has no training data");
  model.validate();
  TrainConfig probe = base;
  probe.method = method;
  probe.alpha = alphas.front();
  probe.beta = betas.front();
  probe.validate();
}

const SweepCell& SweepResult::at(std::size_t ai, std::size_t bi,
                                 std::size_t si) const {
  return cells.at((ai * betas.size() + bi) * seeds.size() + si);
}

std::vector<const SweepCell*> SweepResult::runs(std::size_t ai,
                                                std::size_t bi) const {
  std::vector<const SweepCell*> out;
  for (std::size_t si = 0; si < seeds.size(); ++si) {
    const SweepCell& c = at(ai, bi, si);
    if (!c.failed) out.push_back(&c);
  }
  return out;
}

std::optional<double> SweepResult::median_test(std::size_t ai, std::size_t bi) const {
  std::vector<double> v;
  for (const SweepCell* c : runs(ai, bi)) v.push_back(c->test_acc);
  if (v.empty()) return std::nullopt;
  return median(std::move(v));
}

std::optional<double> SweepResult::median_train(std::size_t ai, std::size_t bi) const {
  std::vector<double> v;
  for (const SweepCell* c : runs(ai, bi)) v.push_back(c->train_acc);
  if (v.empty()) return std::nullopt;
  return median(std::move(v));
}

namespace {

std::optional<std::size_t> index_of(const std::vector<double>& axis, double v) {
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (axis[i] == v) return i;
  }
  return std::nullopt;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Each index is handled
// exactly once; fn must only write state owned by its index.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, jobs), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

TrainConfig run_config(const SweepGrid& grid, double alpha, double beta,
                       std::uint64_t seed) {
  TrainConfig cfg = grid.base;
  cfg.method = grid.method;
  cfg.alpha = alpha;
  cfg.beta = beta;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

std::optional<std::size_t> SweepResult::alpha_index(double alpha) const {
  return index_of(alphas, alpha);
}

std::optional<std::size_t> SweepResult::beta_index(double beta) const {
  return index_of(betas, beta);
}

double median(std::vector<double> values) {
  if (values.empty()) throw UsageError("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

SweepResult run_sweep(const SweepGrid& grid, unsigned jobs) {
  grid.validate();
  SweepResult result;
  result.method = grid.method;
  result.alphas = grid.alphas;
  result.betas = grid.betas;
  result.seeds = grid.seeds;
  const std::size_t nb = grid.betas.size(), ns = grid.seeds.size();
  result.cells.resize(grid.alphas.size() * nb * ns);
  const bool hyp_only = grid.method == Method::kHypothesisOnly;

  parallel_for(result.cells.size(), jobs, [&](std::size_t i) {
    SweepCell& cell = result.cells[i];
    cell.alpha = grid.alphas[i / (nb * ns)];
    cell.beta = grid.betas[(i / ns) % nb];
    cell.seed = grid.seeds[i % ns];
    try {
      const TrainConfig cfg = run_config(grid, cell.alpha, cell.beta, cell.seed);
      TrainResult r = train(init_params(grid.model, grid.vocab_size, cell.seed, grid.init),
                            grid.train, grid.dev, cfg);
      cell.train_acc = accuracy(r.params, grid.train, hyp_only);
      cell.test_acc = grid.test.empty() ? 0.0 : accuracy(r.params, grid.test, hyp_only);
      if (!grid.dev.empty()) cell.dev_acc = r.report.best_dev_acc;
      cell.converged = r.report.converged;
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.error = e.what();
    }
  });
  return result;
}

SweepCell select_best(const SweepResult& result) {
  const SweepCell* best = nullptr;
  auto better = [](const SweepCell& a, const SweepCell& b) {
    if (*a.dev_acc != *b.dev_acc) return *a.dev_acc > *b.dev_acc;
    if (a.alpha != b.alpha) return a.alpha < b.alpha;
    if (a.beta != b.beta) return a.beta < b.beta;
    return a.seed < b.seed;
  };
  for (const auto& c : result.cells) {
    if (c.failed || !c.dev_acc) continue;
    if (!best || better(c, *best)) best = &c;
  }
  if (!best) throw UsageError("select_best: no successful run with a dev accuracy");
  return *best;
}

// ---- cross-validation ------------------------------------------------------------

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k,
                                                 std::uint64_t seed) {
  if (k < 2) throw UsageError("cross-validation needs k >= 2");
  if (n < k) {
    throw UsageError("cross-validation: " + std::to_string(n) +
                     " examples cannot fill " + std::to_string(k) + " folds");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t lo = f * n / k, hi = (f + 1) * n / k;
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(lo),
                    order.begin() + static_cast<std::ptrdiff_t>(hi));
    std::sort(folds[f].begin(), folds[f].end());
  }
  return folds;
}

CrossValidation cross_validate(const SweepGrid& grid, std::size_t k,
                               std::uint64_t fold_seed, unsigned jobs) {
  grid.validate();
  CrossValidation cv;
  cv.folds = make_folds(grid.train.size(), k, fold_seed);

  // Materialized train/held-out splits, shared read-only by all runs.
  std::vector<std::vector<IndexedExample>> fit(k), held(k);
  std::vector<int> fold_of(grid.train.size());
  for (std::size_t f = 0; f < k; ++f) {
    for (std::size_t i : cv.folds[f]) fold_of[i] = static_cast<int>(f);
  }
  for (std::size_t i = 0; i < grid.train.size(); ++i) {
    for (std::size_t f = 0; f < k; ++f) {
      (fold_of[i] == static_cast<int>(f) ? held[f] : fit[f]).push_back(grid.train[i]);
    }
  }

  const std::size_t na = grid.alphas.size(), nb = grid.betas.size(),
                    ns = grid.seeds.size();
  const bool hyp_only = grid.method == Method::kHypothesisOnly;
  std::vector<double> acc(na * nb * k * ns, 0.0);
  std::vector<char> failed(acc.size(), 0);
  parallel_for(acc.size(), jobs, [&](std::size_t i) {
    const std::size_t si = i % ns, f = (i / ns) % k, bi = (i / (ns * k)) % nb,
                      ai = i / (ns * k * nb);
    try {
      const auto seed = grid.seeds[si];
      const TrainConfig cfg = run_config(grid, grid.alphas[ai], grid.betas[bi], seed);
      TrainResult r = train(init_params(grid.model, grid.vocab_size, seed, grid.init),
                            fit[f], {}, cfg);
      acc[i] = accuracy(r.params, held[f], hyp_only);
    } catch (const std::exception&) {
      failed[i] = 1;
    }
  });

  for (std::size_t ai = 0; ai < na; ++ai) {
    for (std::size_t bi = 0; bi < nb; ++bi) {
      CrossValidation::Point p;
      p.alpha = grid.alphas[ai];
      p.beta = grid.betas[bi];
      for (std::size_t f = 0; f < k; ++f) {
        double sum = 0.0;
        std::size_t ok = 0;
        for (std::size_t si = 0; si < ns; ++si) {
          const std::size_t i = ((ai * nb + bi) * k + f) * ns + si;
          if (failed[i]) {
            ++p.failed_runs;
          } else {
            sum += acc[i];
            ++ok;
          }
        }
        p.fold_acc.push_back(ok ? sum / static_cast<double>(ok) : std::nan(""));
      }
      double total = 0.0;
      std::size_t counted = 0;
      for (double a : p.fold_acc) {
        if (!std::isnan(a)) {
          total += a;
          ++counted;
        }
      }
      p.mean = counted ? total / static_cast<double>(counted) : std::nan("");
      cv.points.push_back(std::move(p));
    }
  }
  return cv;
}

// ---- probes ----------------------------------------------------------------------

int majority_label(std::span<const IndexedExample> data, std::size_t labels) {
  if (data.empty()) throw UsageError("majority_label: empty dataset");
  std::vector<std::size_t> counts(labels, 0);
  for (const auto& ex : data) {
    if (ex.label < 0 || static_cast<std::size_t>(ex.label) >= labels) {
      throw UsageError("majority_label: label outside the label space");
    }
    ++counts[static_cast<std::size_t>(ex.label)];
  }
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

ProbeResult hypothesis_only_probe(std::span<const IndexedExample> train_set,
                                  std::span<const IndexedExample> test,
                                  const ModelSpec& spec, std::size_t vocab_size,
                                  TrainConfig cfg, InitScheme init,
                                  std::span<const IndexedExample> target_train) {
  if (test.empty()) throw UsageError("probe: empty test set");
  cfg.method = Method::kHypothesisOnly;
  ModelParams start = init_params(spec, vocab_size, cfg.seed, init);
  TrainResult r = train(start, train_set, {}, cfg);
  for (const Parameter* p : start.group(ParamGroup::kPremiseEncoder)) {
    if (!(r.params.get(p->name()).value == p->value)) {
      throw std::logic_error("probe: premise encoder parameter " + p->name() +
                             " changed during hypothesis-only training");
    }
  }
  ProbeResult out;
  out.accuracy = accuracy(r.params, test, true);
  out.train_accuracy = accuracy(r.params, train_set, true);
  const auto source = target_train.empty() ? test : target_train;
  out.majority_label = majority_label(source, spec.labels.size());
  std::size_t hits = 0;
  for (const auto& ex : test) hits += ex.label == out.majority_label;
  out.majority_baseline = static_cast<double>(hits) / static_cast<double>(test.size());
  return out;
}

// ---- learning curves -------------------------------------------------------------

std::vector<std::vector<std::size_t>> nested_subsets(
    std::size_t pool, std::span<const std::size_t> sizes, std::uint64_t seed) {
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i > 0 && sizes[i] <= sizes[i - 1]) {
      throw UsageError("learning curve sizes must be strictly increasing");
    }
    if (sizes[i] > pool) {
      throw UsageError("learning curve size " + std::to_string(sizes[i]) +
                       " exceeds the " + std::to_string(pool) +
                       " available training examples");
    }
  }
  std::vector<std::size_t> order(pool);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s : sizes) {
    out.emplace_back(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(s));
  }
  return out;
}

LearningCurve learning_curve(
    std::span<const std::pair<std::string, ModelParams>> pretrained,
    std::span<const IndexedExample> target_train,
    std::span<const IndexedExample> target_dev,
    std::span<const std::size_t> sizes, const TrainConfig& cfg,
    InitScheme init) {
  if (pretrained.empty()) throw UsageError("learning curve needs a pretrained model");
  if (target_dev.empty()) throw UsageError("learning curve needs dev data");
  LearningCurve curve;
  curve.sizes.assign(sizes.begin(), sizes.end());
  curve.subsets = nested_subsets(target_train.size(), sizes, cfg.seed);

  std::vector<std::pair<std::string, ModelParams>> models(pretrained.begin(),
                                                          pretrained.end());
  const ModelParams& ref = pretrained.front().second;
  models.emplace_back("scratch", init_params(ref.spec, ref.vocab_size, cfg.seed, init));

  for (const auto& [name, model] : models) {
    std::vector<double> row;
    for (const auto& subset : curve.subsets) {
      if (subset.empty()) {
        row.push_back(accuracy(model, target_dev));
        continue;
      }
      std::vector<IndexedExample> rows;
      rows.reserve(subset.size());
      for (std::size_t i : subset) rows.push_back(target_train[i]);
      row.push_back(accuracy(fine_tune(model, rows, cfg).params, target_dev));
    }
    curve.rows.emplace_back(name, std::move(row));
  }
  return curve;
}

// ---- gradient checks -------------------------------------------------------------

std::vector<GradCheckTrial> gradient_check_trials(Method method, Routing routing,
                                                  int trials, std::uint64_t seed,
                                                  std::size_t batch, double epsilon) {
  if (trials < 0) throw UsageError("gradcheck: trials must be >= 0");
  if (batch == 0 || batch % 4 != 0) {
    throw UsageError("gradcheck: batch must be a positive multiple of 4");
  }
  // Vocabulary of the full symbol set so every trial shares one table shape.
  const Dataset proto = to_dataset(gen_dataset_B(4, 0), "B");
  const Vocabulary vocab = build_vocab(proto);
  const ModelSpec spec = ModelSpec::synthetic(proto.label_space);

  std::vector<GradCheckTrial> out;
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(t));
    std::uniform_real_distribution<double> wide(0.1, 3.0), frac(0.25, 0.75);
    GradCheckTrial trial;
    trial.trial = t;
    trial.cfg.method = method;
    trial.cfg.routing = routing;
    trial.cfg.alpha = method == Method::kMethod2 ? frac(rng) : wide(rng);
    trial.cfg.beta = wide(rng);
    trial.cfg.seed = rng();

    const Dataset data = to_dataset(gen_dataset_B(batch, rng()), "B");
    const auto examples = index_dataset(data, vocab, proto.label_space).examples;
    ModelParams m = init_params(spec, vocab.size(), trial.cfg.seed);

    std::vector<PremiseSwap> swaps;
    if (method == Method::kMethod2) {
      std::vector<std::size_t> ids(batch);
      std::iota(ids.begin(), ids.end(), 0);
      swaps = resolve_swaps(select_swaps(ids, batch, trial.cfg.alpha, 1, rng),
                            ids, examples);
    }
    trial.groups = check_gradients(trial.cfg, m, examples, swaps, epsilon);
    for (const auto& [g, r] : trial.groups) trial.worst = std::max(trial.worst, r.rel_error);
    out.push_back(std::move(trial));
  }
  return out;
}

// ---- reports ---------------------------------------------------------------------

std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "method,alpha,beta,seed,train_acc,test_acc,converged\n";
  for (const auto& c : result.cells) {
    out << to_string(result.method) << ',' << format_number(c.alpha) << ','
        << format_number(c.beta) << ',' << c.seed << ',';
    if (c.failed) {
      out << ",,failed\n";
    } else {
      out << format_number(c.train_acc) << ',' << format_number(c.test_acc) << ','
          << (c.converged ? 1 : 0) << '\n';
    }
  }
}

namespace {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double csv_double(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') {
    throw DataError("sweep csv line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

template <typename T>
void append_unique(std::vector<T>& axis, const T& v) {
  if (std::find(axis.begin(), axis.end(), v) == axis.end()) axis.push_back(v);
}

}  // namespace

SweepResult read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      trim(line) != "method,alpha,beta,seed,train_acc,test_acc,converged") {
    throw DataError("sweep csv: missing or unexpected header");
  }
  SweepResult r;
  std::vector<SweepCell> rows;
  std::size_t lineno = 1;
  bool have_method = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    if (f.size() != 7) {
      throw DataError("sweep csv line " + std::to_string(lineno) + ": expected 7 fields");
    }
    const Method m = parse_method(f[0]);
    if (have_method && m != r.method) {
      throw DataError("sweep csv line " + std::to_string(lineno) + ": mixed methods");
    }
    r.method = m;
    have_method = true;
    SweepCell c;
    c.alpha = csv_double(f[1], lineno);
    c.beta = csv_double(f[2], lineno);
    char* end = nullptr;
    c.seed = std::strtoull(f[3].c_str(), &end, 10);
    if (f[3].empty() || *end != '\0') {
      throw DataError("sweep csv line " + std::to_string(lineno) + ": bad seed");
    }
    if (f[6] == "failed") {
      c.failed = true;
    } else {
      c.train_acc = csv_double(f[4], lineno);
      c.test_acc = csv_double(f[5], lineno);
      if (f[6] != "0" && f[6] != "1") {
        throw DataError("sweep csv line " + std::to_string(lineno) + ": bad converged flag");
      }
      c.converged = f[6] == "1";
    }
    append_unique(r.alphas, c.alpha);
    append_unique(r.betas, c.beta);
    append_unique(r.seeds, c.seed);
    rows.push_back(std::move(c));
  }
  if (rows.empty()) throw DataError("sweep csv: no rows");
  const std::size_t nb = r.betas.size(), ns = r.seeds.size();
  r.cells.resize(r.alphas.size() * nb * ns);
  std::vector<char> seen(r.cells.size(), 0);
  for (auto& c : rows) {
    const std::size_t ai = *index_of(r.alphas, c.alpha);
    const std::size_t bi = *index_of(r.betas, c.beta);
    const std::size_t si = static_cast<std::size_t>(
        std::find(r.seeds.begin(), r.seeds.end(), c.seed) - r.seeds.begin());
    const std::size_t i = (ai * nb + bi) * ns + si;
    if (seen[i]) throw DataError("sweep csv: duplicate grid cell");
    seen[i] = 1;
    r.cells[i] = std::move(c);
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw DataError("sweep csv: grid is incomplete");
  }
  return r;
}

std::string render_markdown(const SweepResult& result) {
  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header{"beta \\ alpha"};
  for (double a : result.alphas) header.push_back(format_number(a));
  table.push_back(header);
  for (std::size_t bi = 0; bi < result.betas.size(); ++bi) {
    std::vector<std::string> row{format_number(result.betas[bi])};
    for (std::size_t ai = 0; ai < result.alphas.size(); ++ai) {
      const auto test = result.median_test(ai, bi);
      if (!test) {
        row.emplace_back("*");
        continue;
      }
      std::string cell = std::to_string(static_cast<int>(std::lround(*test * 100.0)));
      if (*result.median_train(ai, bi) < kLearnedTrainAcc) cell += "*";
      row.push_back(cell);
    }
    table.push_back(row);
  }
  std::vector<std::size_t> width(header.size(), 3);
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  auto emit = [&](std::ostringstream& out, const std::vector<std::string>& row) {
    out << '|';
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string pad(width[c] - row[c].size(), ' ');
      out << ' ' << (c == 0 ? row[c] + pad : pad + row[c]) << " |";
    }
    out << '\n';
  };
  std::ostringstream out;
  emit(out, table[0]);
  out << '|';
  for (std::size_t c = 0; c < width.size(); ++c) {
    out << (c == 0 ? ' ' + std::string(width[c], '-') + " |"
                   : ' ' + std::string(width[c] - 1, '-') + ": |");
  }
  out << '\n';
  for (std::size_t r = 1; r < table.size(); ++r) emit(out, table[r]);
  return out.str();
}

void write_curve_csv(std::ostream& out, const LearningCurve& curve) {
  out << "model";
  for (std::size_t s : curve.sizes) out << ',' << s;
  out << '\n';
  for (const auto& [name, accs] : curve.rows) {
    out << name;
    for (double a : accs) out << ',' << format_number(a);
    out << '\n';
  }
}

// ---- key=value files -------------------------------------------------------------

std::vector<std::pair<std::string, std::string>> parse_key_values(
    std::istream& in, const std::string& source) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw UsageError(source + ":" + std::to_string(lineno) +
                       ": expected key=value, got '" + t + "'");
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const auto& kv) { return kv.first == key; });
    if (it != out.end()) {
      it->second = std::move(value);
    } else {
      out.emplace_back(std::move(key), std::move(value));
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> read_key_values(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path.string());
  return parse_key_values(in, path.string());
}

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) {
    const std::string s = trim(part);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') throw UsageError("bad number '" + s + "' in list");
    out.push_back(v);
  }
  return out;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> out;
  auto number = [](const std::string& s) {
    char* end = nullptr;
    if (s.empty() || s[0] == '-') throw UsageError("bad seed '" + s + "'");
    const auto v = std::strtoull(s.c_str(), &end, 10);
    if (*end != '\0') throw UsageError("bad seed '" + s + "'");
    return static_cast<std::uint64_t>(v);
  };
  for (const auto& part : split(text, ',')) {
    const std::string s = trim(part);
    const auto dash = s.find('-', 1);
    if (dash == std::string::npos) {
      out.push_back(number(s));
      continue;
    }
    const auto lo = number(s.substr(0, dash)), hi = number(s.substr(dash + 1));
    if (hi < lo) throw UsageError("bad seed range '" + s + "'");
    for (auto v = lo; v <= hi; ++v) out.push_back(v);
  }
  return out;
}

}  // namespace debias
