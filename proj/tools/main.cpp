// debias: command-line front end for data generation, training, sweeps,
// probes, fine-tuning curves, reports and gradient checks.
//
// Every subcommand takes its settings as keys. A key can come from the
// built-in default, a key=value file (--config, or --spec for sweep) or a
// flag (--max-epochs for max_epochs); flags win over the file, the file over
// defaults. The effective settings are echoed as a key=value block that can
// be fed back through --config.

#include <malloc.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "debias/data_io.hpp"
#include "debias/error.hpp"
#include "debias/harness.hpp"
#include "debias/model.hpp"
#include "debias/synthetic.hpp"
#include "debias/training.hpp"

namespace fs = std::filesystem;
using namespace debias;

namespace {

struct KeySpec {
  std::string key;
  std::string fallback;
  std::string help;
};

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

// Settings of one subcommand, in declaration order.
class Settings {
 public:
  void set(const std::string& key, std::string value) {
    for (auto& kv : values_) {
      if (kv.first == key) {
        kv.second = std::move(value);
        return;
      }
    }
    values_.emplace_back(key, std::move(value));
  }
  const std::string& get(const std::string& key) const {
    for (const auto& kv : values_) {
      if (kv.first == key) return kv.second;
    }
    throw std::logic_error("undeclared key " + key);
  }
  bool has(const std::string& key) const { return !get(key).empty(); }
  bool declares(const std::string& key) const {
    return std::any_of(values_.begin(), values_.end(),
                       [&](const auto& kv) { return kv.first == key; });
  }
  const std::string& require(const std::string& key) const {
    if (!has(key)) throw UsageError("--" + dashed(key) + " is required");
    return get(key);
  }
  double number(const std::string& key) const {
    const std::string& s = get(key);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') throw UsageError(key + ": bad number '" + s + "'");
    return v;
  }
  std::uint64_t count(const std::string& key) const {
    const std::string& s = get(key);
    char* end = nullptr;
    const auto v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || s[0] == '-' || *end != '\0') {
      throw UsageError(key + ": expected a non-negative integer, got '" + s + "'");
    }
    return v;
  }
  bool flag(const std::string& key) const {
    const std::string& s = get(key);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw UsageError(key + ": expected true or false, got '" + s + "'");
  }
  std::string text() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
  }

 private:
  std::vector<std::pair<std::string, std::string>> values_;
};

class Command {
 public:
  Command(CLI::App& app, const std::string& name, const std::string& help,
          std::vector<KeySpec> keys, const std::string& config_names = "--config")
      : keys_(std::move(keys)) {
    sub_ = app.add_subcommand(name, help);
    sub_->add_option(config_names, config_path_, "key=value settings file");
    for (const auto& k : keys_) {
      std::string help_text = k.help;
      if (!k.fallback.empty()) help_text += " [" + k.fallback + "]";
      sub_->add_option("--" + dashed(k.key), flags_[k.key], help_text);
    }
  }

  CLI::App* app() const { return sub_; }
  bool chosen() const { return sub_->parsed(); }

  Settings resolve() const {
    Settings s;
    for (const auto& k : keys_) s.set(k.key, k.fallback);
    if (!config_path_.empty()) {
      for (const auto& [key, value] : read_key_values(config_path_)) {
        if (!declared(key)) {
          throw UsageError(config_path_ + ": unknown key '" + key + "' for " +
                           sub_->get_name());
        }
        s.set(key, value);
      }
    }
    for (const auto& k : keys_) {
      if (sub_->count("--" + dashed(k.key)) > 0) s.set(k.key, flags_.at(k.key));
    }
    return s;
  }

 private:
  bool declared(const std::string& key) const {
    return std::any_of(keys_.begin(), keys_.end(),
                       [&](const KeySpec& k) { return k.key == key; });
  }

  CLI::App* sub_ = nullptr;
  std::vector<KeySpec> keys_;
  std::string config_path_;
  std::map<std::string, std::string> flags_;
};

// TrainConfig keys with their defaults, minus `skip`.
std::vector<KeySpec> train_keys(std::vector<std::string> skip = {}) {
  static const std::map<std::string, std::string> help = {
      {"method", "baseline|method1|method2|hyp_only"},
      {"alpha", "adversarial weight (method2: swap fraction)"},
      {"beta", "head weight / reversal scale"},
      {"routing", "reversal|literal"},
      {"lr", "SGD learning rate"},
      {"clip_norm", "gradient-norm clip, 0 disables"},
      {"max_epochs", "epoch limit"},
      {"batch_size", "0 for full batch; auto: full for synthetic, 64 for text"},
      {"seed", "initialization and shuffling seed"},
      {"stop", "converge|max_epochs"},
      {"acc_streak", "stop after this many epochs at train accuracy 1 (0 off)"},
      {"loss_tol", "stop when the objective changes by less than this"},
      {"eval_each", "dev evaluation period in epochs"},
  };
  std::istringstream in(TrainConfig{}.to_config_text());
  std::vector<KeySpec> out;
  for (const auto& [key, value] : parse_key_values(in, "defaults")) {
    if (std::find(skip.begin(), skip.end(), key) != skip.end()) continue;
    out.push_back({key, key == "batch_size" ? "auto" : value,
                   help.count(key) ? help.at(key) : ""});
  }
  return out;
}

std::vector<KeySpec> operator+(std::vector<KeySpec> a, const std::vector<KeySpec>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

const std::vector<KeySpec> kModelKeys = {
    {"model", "synthetic", "architecture preset: synthetic|text"},
    {"init", "framework", "initialization: framework|uniform"},
    {"embeddings", "", "pre-trained embedding file (token v1 .. vd per line)"},
    {"tokenization", "char", "char|whitespace"},
    {"min_count", "1", "vocabulary frequency cutoff"},
};

TrainConfig train_config(const Settings& s) {
  TrainConfig cfg;
  for (const auto& spec : train_keys()) {
    if (s.declares(spec.key)) apply_config_value(cfg, spec.key, s.get(spec.key));
  }
  cfg.validate();
  return cfg;
}

void echo(const std::string& name, const Settings& s) {
  std::cout << "# " << name << " effective config\n" << s.text() << "#\n";
}

Tokenization tokenization(const Settings& s) {
  return parse_tokenization(s.get("tokenization"));
}

Dataset load(const Settings& s, const std::string& key) {
  return load_tsv(s.require(key), tokenization(s));
}

ModelSpec model_spec(const Settings& s, std::vector<std::string> labels) {
  const std::string& name = s.get("model");
  if (name == "synthetic") return ModelSpec::synthetic(std::move(labels));
  if (name == "text") return ModelSpec::text(std::move(labels));
  throw UsageError("unknown model preset '" + name + "'");
}

void resolve_batch_size(Settings& s) {
  if (!s.declares("batch_size") || s.get("batch_size") != "auto") return;
  const bool text = s.declares("model") && s.get("model") == "text";
  s.set("batch_size", text ? "64" : "0");
}

ModelParams initial_model(const Settings& s, const ModelSpec& spec,
                          const Vocabulary& vocab, std::uint64_t seed) {
  ModelParams m = init_params(spec, vocab.size(), seed, parse_init_scheme(s.get("init")));
  if (s.has("embeddings")) {
    const EmbeddingTable e = load_embeddings(s.get("embeddings"), vocab,
                                             spec.encoder.dim, seed);
    m.get("premise.embedding").value = e.table;
    m.get("hypothesis.embedding").value = e.table;
    std::cout << "embedding coverage " << e.coverage << "\n";
  }
  return m;
}

std::vector<IndexedExample> indexed(const Dataset& d, const Vocabulary& vocab,
                                    const std::vector<std::string>& labels) {
  IndexedDataset r = index_dataset(d, vocab, labels);
  if (r.unknown_tokens > 0) {
    std::cout << d.name << ": " << r.unknown_tokens << " unknown tokens\n";
  }
  return std::move(r.examples);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

// ---- subcommands ---------------------------------------------------------------

int cmd_gen_synthetic(const Settings& s) {
  const std::string& v = s.get("variant");
  SynthVariant variant;
  if (v == "A") variant = SynthVariant::kA;
  else if (v == "B") variant = SynthVariant::kB;
  else throw UsageError("variant must be A or B, got '" + v + "'");
  const auto examples = gen_dataset(variant, s.count("n"), s.count("seed"));
  const Dataset d = to_dataset(examples, v);
  write_tsv(s.require("out"), d, Tokenization::kCharacter);
  std::size_t t = 0;
  for (const auto& e : examples) t += e.label;
  std::cout << kTrueLabel << " " << t << "\n"
            << kFalseLabel << " " << examples.size() - t << "\n"
            << "wrote " << s.get("out") << "\n";
  return 0;
}

int cmd_train(const Settings& s) {
  const TrainConfig cfg = train_config(s);
  const fs::path out_model = s.require("out_model");
  const Dataset train_set = load(s, "train");
  const Vocabulary vocab = build_vocab(train_set, s.count("min_count"));
  const auto labels = train_set.label_space;
  const auto train_rows = indexed(train_set, vocab, labels);
  std::vector<IndexedExample> dev_rows, test_rows;
  if (s.has("dev")) dev_rows = indexed(load(s, "dev"), vocab, labels);
  if (s.has("test")) test_rows = indexed(load(s, "test"), vocab, labels);

  const ModelParams init = initial_model(s, model_spec(s, labels), vocab, cfg.seed);
  const TrainResult r = train(init, train_rows, dev_rows, cfg);

  save_checkpoint(out_model, vocab, r.params);
  const fs::path report = s.has("report") ? fs::path(s.get("report"))
                                          : fs::path(out_model.string() + ".report.csv");
  std::ostringstream csv;
  write_report_csv(csv, r.report);
  write_text(report, csv.str());
  write_text(out_model.string() + ".config", s.text());

  std::cout << "epochs " << r.report.epochs_run << "\n"
            << "converged " << (r.report.converged ? "true" : "false") << "\n"
            << "train_acc " << accuracy(r.params, train_rows) << "\n";
  if (!dev_rows.empty()) {
    std::cout << "best_epoch " << r.report.best_epoch << "\n"
              << "dev_acc " << r.report.best_dev_acc << "\n";
  }
  if (!test_rows.empty()) std::cout << "test_acc " << accuracy(r.params, test_rows) << "\n";
  std::cout << "wrote " << out_model.string() << " and " << report.string() << "\n";
  return 0;
}

int cmd_eval(const Settings& s) {
  const Checkpoint ck = load_checkpoint(s.require("model"));
  const Dataset data = load(s, "data");
  const LabelMap map(parse_label_map_kind(s.get("label_map")), ck.model.spec.labels);
  double acc = 0.0;
  if (!s.flag("hypothesis_only")) {
    acc = evaluate(ck.model, ck.vocab, data, map);
  } else if (!data.examples.empty()) {
    std::vector<IndexedExample> rows;
    for (const auto& ex : data.examples) {
      rows.push_back({ck.vocab.encode(ex.premise), ck.vocab.encode(ex.hypothesis), 0});
    }
    const auto pred = predict_hypothesis_only(ck.model, rows);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string& source = ck.model.spec.labels[static_cast<std::size_t>(pred[i])];
      hits += map.apply(source) == data.examples[i].label;
    }
    acc = static_cast<double>(hits) / static_cast<double>(rows.size());
  }
  std::cout << "examples " << data.examples.size() << "\n"
            << "accuracy " << acc << "\n";
  return 0;
}

std::vector<double> axis(const std::string& text, Method method, bool alpha) {
  if (text == "synthetic") return alpha ? synthetic_alphas(method) : synthetic_betas();
  if (text == "stronger") return stronger_range();
  return parse_double_list(text);
}

int cmd_sweep(const Settings& s) {
  const TrainConfig base = train_config(s);
  const fs::path out = s.require("out");
  const std::size_t folds = s.count("folds");
  const Method method = base.method;
  SweepGrid grid;
  grid.method = method;
  grid.alphas = axis(s.get("alphas"), method, true);
  grid.betas = axis(s.get("betas"), method, false);
  grid.seeds = parse_seed_list(s.get("seeds"));
  grid.base = base;
  grid.init = parse_init_scheme(s.get("init"));

  const Dataset train_set = load(s, "train");
  const Vocabulary vocab = build_vocab(train_set, s.count("min_count"));
  const auto labels = train_set.label_space;
  const auto train_rows = indexed(train_set, vocab, labels);
  std::vector<IndexedExample> dev_rows, test_rows;
  if (s.has("dev")) dev_rows = indexed(load(s, "dev"), vocab, labels);
  if (folds == 0) test_rows = indexed(load(s, "test"), vocab, labels);
  grid.model = model_spec(s, labels);
  grid.vocab_size = vocab.size();
  grid.train = train_rows;
  grid.dev = dev_rows;
  grid.test = test_rows;
  const unsigned jobs = static_cast<unsigned>(std::max<std::uint64_t>(1, s.count("jobs")));

  fs::create_directories(out);
  write_text(out / "config.txt", s.text());

  if (folds > 0) {
    const CrossValidation cv = cross_validate(grid, folds, s.count("fold_seed"), jobs);
    std::ostringstream csv;
    csv << "alpha,beta";
    for (std::size_t f = 0; f < folds; ++f) csv << ",fold" << f;
    csv << ",mean,failed_runs\n";
    const CrossValidation::Point* best = nullptr;
    for (const auto& p : cv.points) {
      csv << format_number(p.alpha) << ',' << format_number(p.beta);
      for (double a : p.fold_acc) csv << ',' << format_number(a);
      csv << ',' << format_number(p.mean) << ',' << p.failed_runs << '\n';
      if (p.mean == p.mean && (!best || p.mean > best->mean)) best = &p;
    }
    write_text(out / "cv.csv", csv.str());
    std::cout << csv.str();
    if (best) {
      std::cout << "best alpha=" << format_number(best->alpha)
                << " beta=" << format_number(best->beta)
                << " mean=" << format_number(best->mean) << "\n";
    }
    std::cout << "wrote " << (out / "cv.csv").string() << "\n";
    return 0;
  }

  const SweepResult r = run_sweep(grid, jobs);
  std::ostringstream csv;
  write_sweep_csv(csv, r);
  write_text(out / "sweep.csv", csv.str());
  const std::string md = render_markdown(r);
  write_text(out / "sweep.md", md);
  std::size_t failed = 0;
  for (const auto& c : r.cells) {
    if (c.failed) {
      ++failed;
      std::cerr << "run alpha=" << format_number(c.alpha) << " beta=" << format_number(c.beta)
                << " seed=" << c.seed << " failed: " << c.error << "\n";
    }
  }
  std::cout << md;
  if (!dev_rows.empty()) {
    const SweepCell best = select_best(r);
    std::cout << "best on dev: alpha=" << format_number(best.alpha)
              << " beta=" << format_number(best.beta) << " seed=" << best.seed
              << " dev=" << format_number(*best.dev_acc)
              << " test=" << format_number(best.test_acc) << "\n";
  }
  std::cout << "runs " << r.cells.size() << " failed " << failed << "\n"
            << "wrote " << (out / "sweep.csv").string() << " and "
            << (out / "sweep.md").string() << "\n";
  return 0;
}

int cmd_probe(const Settings& s) {
  const TrainConfig cfg = train_config(s);
  const Dataset train_set = load(s, "train");
  const Vocabulary vocab = build_vocab(train_set, s.count("min_count"));
  const auto labels = train_set.label_space;
  const auto train_rows = indexed(train_set, vocab, labels);
  const auto test_rows = indexed(load(s, "test"), vocab, labels);
  std::vector<IndexedExample> target_rows;
  if (s.has("target_train")) target_rows = indexed(load(s, "target_train"), vocab, labels);
  const ProbeResult r =
      hypothesis_only_probe(train_rows, test_rows, model_spec(s, labels), vocab.size(),
                            cfg, parse_init_scheme(s.get("init")), target_rows);
  std::cout << "probe_train_acc " << r.train_accuracy << "\n"
            << "probe_acc " << r.accuracy << "\n"
            << "majority_label " << labels[static_cast<std::size_t>(r.majority_label)] << "\n"
            << "majority_baseline " << r.majority_baseline << "\n";
  return 0;
}

std::vector<std::size_t> size_list(const std::string& text) {
  std::vector<std::size_t> out;
  for (double v : parse_double_list(text)) {
    if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::size_t>(v))) {
      throw UsageError("sizes must be non-negative integers");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

int cmd_finetune(const Settings& s) {
  const TrainConfig cfg = train_config(s);
  const auto sizes = size_list(s.require("sizes"));
  std::vector<std::pair<std::string, ModelParams>> models;
  std::optional<Vocabulary> vocab;
  std::string names = s.require("model");
  std::stringstream list(names);
  for (std::string item; std::getline(list, item, ',');) {
    if (item.empty()) continue;
    Checkpoint ck = load_checkpoint(item);
    if (vocab && !(ck.vocab == *vocab)) {
      throw UsageError("finetune: " + item + " has a different vocabulary");
    }
    if (!models.empty() && ck.model.spec.labels != models.front().second.spec.labels) {
      throw UsageError("finetune: " + item + " has a different label space");
    }
    vocab = ck.vocab;
    models.emplace_back(fs::path(item).stem().string(), std::move(ck.model));
  }
  if (models.empty()) throw UsageError("--model is required");
  const auto& labels = models.front().second.spec.labels;

  auto target = indexed(load(s, "target"), *vocab, labels);
  std::vector<IndexedExample> dev;
  if (s.has("target_dev")) {
    dev = indexed(load(s, "target_dev"), *vocab, labels);
  } else {
    // 80/20 split of the target set
    std::vector<std::size_t> order(target.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(s.count("split_seed"));
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_train = target.size() * 4 / 5;
    std::vector<IndexedExample> tr;
    for (std::size_t i = 0; i < order.size(); ++i) {
      (i < n_train ? tr : dev).push_back(target[order[i]]);
    }
    target = std::move(tr);
  }
  const LearningCurve curve = learning_curve(models, target, dev, sizes, cfg,
                                             parse_init_scheme(s.get("init")));
  std::ostringstream csv;
  write_curve_csv(csv, curve);
  std::cout << csv.str();
  if (s.has("out")) {
    write_text(s.get("out"), csv.str());
    std::cout << "wrote " << s.get("out") << "\n";
  }
  return 0;
}

int cmd_report(const Settings& s) {
  std::ifstream in(s.require("in"));
  if (!in) throw DataError("cannot read " + s.get("in"));
  const SweepResult r = read_sweep_csv(in);
  const std::string& format = s.get("format");
  if (format == "md") {
    std::cout << render_markdown(r);
  } else if (format == "csv") {
    write_sweep_csv(std::cout, r);
  } else {
    throw UsageError("format must be csv or md, got '" + format + "'");
  }
  return 0;
}

int cmd_gradcheck(const Settings& s) {
  const Method method = parse_method(s.get("method"));
  const Routing routing = parse_routing(s.get("routing"));
  const double tol = s.number("tolerance");
  const auto trials = gradient_check_trials(method, routing,
                                            static_cast<int>(s.count("trials")),
                                            s.count("seed"), s.count("batch"),
                                            s.number("epsilon"));
  std::size_t bad = 0;
  double worst = 0.0;
  for (const auto& t : trials) {
    std::cout << "trial " << t.trial << " alpha=" << format_number(t.cfg.alpha)
              << " beta=" << format_number(t.cfg.beta);
    for (const auto& [g, r] : t.groups) {
      std::cout << ' ' << to_string(g) << '=' << r.rel_error;
    }
    const bool ok = t.worst < tol;
    std::cout << (ok ? " ok" : " FAIL") << "\n";
    bad += !ok;
    worst = std::max(worst, t.worst);
  }
  std::cout << "worst " << worst << " over " << trials.size() << " trials\n";
  if (bad > 0) {
    throw NumericalError(std::to_string(bad) + " gradient check trial(s) exceeded " +
                         format_number(tol));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  // Tape tensors are short-lived and large; keep them off mmap.
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 128 << 20);

  CLI::App app{"Hypothesis-only bias experiments"};
  app.require_subcommand(1);

  Command gen(app, "gen-synthetic", "write a synthetic A or B dataset",
              {{"variant", "A", "A|B"},
               {"n", "1000", "number of examples (multiple of 4)"},
               {"seed", "1", "shuffle seed"},
               {"out", "", "output TSV"}});
  Command train(app, "train", "train one model",
                std::vector<KeySpec>{{"train", "", "training TSV"},
                                     {"dev", "", "dev TSV for snapshot selection"},
                                     {"test", "", "test TSV to score at the end"},
                                     {"out_model", "", "checkpoint path"},
                                     {"report", "", "per-epoch CSV [<out-model>.report.csv]"}} +
                    kModelKeys + train_keys());
  Command eval(app, "eval", "score a checkpoint on a dataset",
               {{"model", "", "checkpoint"},
                {"data", "", "TSV to score"},
                {"label_map", "identity", "identity|three_to_binary_entailed|three_to_scitail|joci_ordinal_to_three"},
                {"hypothesis_only", "false", "score the hypothesis-only head"},
                {"tokenization", "char", "char|whitespace"}});
  Command sweep(app, "sweep", "grid of runs over alpha, beta and seeds",
                std::vector<KeySpec>{{"alphas", "synthetic", "list, or synthetic|stronger"},
                                     {"betas", "synthetic", "list, or synthetic|stronger"},
                                     {"seeds", "1-5", "list or range"},
                                     {"train", "", "training TSV"},
                                     {"dev", "", "dev TSV (selection)"},
                                     {"test", "", "test TSV"},
                                     {"out", "", "output directory"},
                                     {"jobs", "1", "worker threads"},
                                     {"folds", "0", "k-fold cross-validation on train"},
                                     {"fold_seed", "1", "fold assignment seed"}} +
                    kModelKeys + train_keys({"alpha", "beta", "seed"}),
                "--config,--spec");
  Command probe(app, "probe", "hypothesis-only bias probe",
                std::vector<KeySpec>{{"train", "", "probe training TSV"},
                                     {"test", "", "probe test TSV"},
                                     {"target_train", "", "TSV whose majority label is the baseline"}} +
                    kModelKeys + train_keys({"method", "alpha", "beta", "routing"}));
  Command finetune(app, "finetune", "learning curves on a target dataset",
                   std::vector<KeySpec>{{"model", "", "comma-separated checkpoints"},
                                        {"target", "", "target training TSV"},
                                        {"target_dev", "", "target dev TSV [80/20 split]"},
                                        {"sizes", "", "subset sizes, e.g. 0,10,100"},
                                        {"split_seed", "1", "seed of the 80/20 split"},
                                        {"out", "", "curve CSV"},
                                        {"init", "framework", "scratch model init"},
                                        {"tokenization", "char", "char|whitespace"}} +
                       train_keys({"method", "alpha", "beta", "routing"}));
  Command report(app, "report", "render a sweep CSV",
                 {{"in", "", "sweep CSV"}, {"format", "md", "md|csv"}});
  Command gradcheck(app, "gradcheck", "finite-difference check of the objectives",
                    {{"method", "method1", "baseline|method1|method2|hyp_only"},
                     {"routing", "reversal", "reversal|literal"},
                     {"trials", "20", "random instances"},
                     {"seed", "1", "instance seed"},
                     {"batch", "8", "examples per instance"},
                     {"epsilon", "1e-05", "finite-difference step"},
                     {"tolerance", "1e-06", "largest accepted relative error"}});

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ErrorKind::kUsage);
  }

  struct Entry {
    const Command* cmd;
    int (*run)(const Settings&);
  };
  const Entry entries[] = {{&gen, cmd_gen_synthetic}, {&train, cmd_train},
                           {&eval, cmd_eval},         {&sweep, cmd_sweep},
                           {&probe, cmd_probe},       {&finetune, cmd_finetune},
                           {&report, cmd_report},     {&gradcheck, cmd_gradcheck}};
  for (const auto& e : entries) {
    if (!e.cmd->chosen()) continue;
    try {
      Settings s = e.cmd->resolve();
      resolve_batch_size(s);
      echo(e.cmd->app()->get_name(), s);
      std::cout.flush();
      return e.run(s);
    } catch (const Error& err) {
      std::cerr << "error: " << err.what() << "\n";
      return static_cast<int>(err.kind());
    } catch (const std::exception& err) {
      std::cerr << "error: " << err.what() << "\n";
      return static_cast<int>(ErrorKind::kUsage);
    }
  }
  return static_cast<int>(ErrorKind::kUsage);
}
