#pragma once

// Sweeps over (alpha, beta, seed) grids, k-fold cross-validation,
// hypothesis-only probes, fine-tuning learning curves and report rendering.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "debias/model.hpp"
#include "debias/training.hpp"

namespace debias {

// ---- grids -----------------------------------------------------------------------

// Default alpha and beta axes of the synthetic sweeps.
std::vector<double> synthetic_alphas(Method method);
std::vector<double> synthetic_betas();
// The stronger-hyperparameter range used on real data.
std::vector<double> stronger_range();

struct SweepGrid {
  Method method = Method::kMethod1;
  std::vector<double> alphas;
  std::vector<double> betas;
  std::vector<std::uint64_t> seeds;
  TrainConfig base;  // method, alpha, beta and seed are overwritten per run

  ModelSpec model;
  std::size_t vocab_size = 0;
  InitScheme init = InitScheme::kFramework;

  // Must outlive the sweep. An empty dev span trains without selection.
  std::span<const IndexedExample> train;
  std::span<const IndexedExample> dev;
  std::span<const IndexedExample> test;

  void validate() const;
};

struct SweepCell {
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  std::optional<double> dev_acc;
  bool converged = false;
  bool failed = false;  // the run threw; accuracies are meaningless
  std::string error;

  // Compares the report fields (what the CSV carries); dev_acc and the
  // error text are diagnostics.
  bool operator==(const SweepCell& o) const {
    return alpha == o.alpha && beta == o.beta && seed == o.seed &&
           failed == o.failed &&
           (failed || (train_acc == o.train_acc && test_acc == o.test_acc &&
                       converged == o.converged));
  }
};

struct SweepResult {
  Method method = Method::kMethod1;
  std::vector<double> alphas;
  std::vector<double> betas;
  std::vector<std::uint64_t> seeds;
  // Row-major over (alpha, beta, seed) in axis order.
  std::vector<SweepCell> cells;

  const SweepCell& at(std::size_t ai, std::size_t bi, std::size_t si) const;
  // Cells of one grid point that did not fail.
  std::vector<const SweepCell*> runs(std::size_t ai, std::size_t bi) const;
  // Medians over non-failed seeds; nullopt when every seed failed.
  std::optional<double> median_test(std::size_t ai, std::size_t bi) const;
  std::optional<double> median_train(std::size_t ai, std::size_t bi) const;
  // Index of a value on an axis (exact match), or nullopt.
  std::optional<std::size_t> alpha_index(double alpha) const;
  std::optional<std::size_t> beta_index(double beta) const;

  bool operator==(const SweepResult&) const = default;
};

// Failure to learn the (biased) training set.
inline constexpr double kLearnedTrainAcc = 0.99;

double median(std::vector<double> values);

// One independent run per (alpha, beta, seed) on `jobs` worker threads.
// A run that throws becomes a failed cell; the sweep itself only throws on
// an invalid grid. Results do not depend on `jobs` or execution order.
SweepResult run_sweep(const SweepGrid& grid, unsigned jobs = 1);

// Highest dev accuracy among non-failed cells; ties go to smaller alpha,
// then smaller beta, then earlier seed. Throws when no cell qualifies.
SweepCell select_best(const SweepResult& result);

// ---- cross-validation ------------------------------------------------------------

struct CrossValidation {
  struct Point {
    double alpha = 0.0;
    double beta = 0.0;
    std::vector<double> fold_acc;  // mean over seeds, per fold
    double mean = 0.0;
    std::size_t failed_runs = 0;
  };
  std::vector<std::vector<std::size_t>> folds;  // example indices per fold
  std::vector<Point> points;                    // alpha-major grid order
};

// Seeded partition of [0, n) into k folds whose sizes differ by at most one.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k,
                                                 std::uint64_t seed);

// Trains on k-1 folds and scores the held-out fold for every grid point.
// `grid.train` is the pool; grid.dev and grid.test are ignored.
CrossValidation cross_validate(const SweepGrid& grid, std::size_t k,
                               std::uint64_t fold_seed, unsigned jobs = 1);

// ---- probes ----------------------------------------------------------------------

struct ProbeResult {
  double accuracy = 0.0;        // on the test set
  double train_accuracy = 0.0;
  int majority_label = 0;
  double majority_baseline = 0.0;  // accuracy of always predicting it
};

// Most frequent label (lowest index on ties).
int majority_label(std::span<const IndexedExample> data, std::size_t labels);

// Hypothesis encoder + head trained alone (cfg.method is forced to
// hyp_only) and read out through the head. The majority label comes from
// `target_train` when given, otherwise from the test set itself.
ProbeResult hypothesis_only_probe(std::span<const IndexedExample> train,
                                  std::span<const IndexedExample> test,
                                  const ModelSpec& spec, std::size_t vocab_size,
                                  TrainConfig cfg,
                                  InitScheme init = InitScheme::kFramework,
                                  std::span<const IndexedExample> target_train = {});

// ---- learning curves -------------------------------------------------------------

struct LearningCurve {
  std::vector<std::size_t> sizes;
  std::vector<std::vector<std::size_t>> subsets;  // target-train indices per size
  // One row per model (pretrained models first, then "scratch"): dev
  // accuracy after fine-tuning on each subset.
  std::vector<std::pair<std::string, std::vector<double>>> rows;
};

// Nested subsets: subset i is the first sizes[i] entries of one seeded
// permutation of the target training set.
std::vector<std::vector<std::size_t>> nested_subsets(
    std::size_t pool, std::span<const std::size_t> sizes, std::uint64_t seed);

// Fine-tunes every pretrained model, plus a freshly initialized one named
// "scratch", on each subset and scores it on `target_dev`. Size 0 means no
// fine-tuning (zero-shot).
LearningCurve learning_curve(
    std::span<const std::pair<std::string, ModelParams>> pretrained,
    std::span<const IndexedExample> target_train,
    std::span<const IndexedExample> target_dev,
    std::span<const std::size_t> sizes, const TrainConfig& cfg,
    InitScheme init = InitScheme::kFramework);

// ---- gradient checks -------------------------------------------------------------

struct GradCheckTrial {
  int trial = 0;
  TrainConfig cfg;  // sampled alpha and beta
  std::map<ParamGroup, GradCheckResult> groups;
  double worst = 0.0;  // largest group rel_error
};

// Random small instances: a batch of `batch` synthetic B examples, freshly
// initialized parameters, alpha and beta drawn per trial (method2 alpha in
// [0.25, 0.75] so that some rows are swapped, otherwise [0.1, 3]; beta in
// [0.1, 3]). Each group is compared against its explicit objective.
std::vector<GradCheckTrial> gradient_check_trials(Method method, Routing routing,
                                                  int trials, std::uint64_t seed,
                                                  std::size_t batch = 8,
                                                  double epsilon = 1e-5);

// ---- reports ---------------------------------------------------------------------

// method,alpha,beta,seed,train_acc,test_acc,converged (failed runs have empty
// accuracies and converged=failed).
void write_sweep_csv(std::ostream& out, const SweepResult& result);
SweepResult read_sweep_csv(std::istream& in);

// Median test accuracy in percent, beta rows and alpha columns. A cell whose
// median train accuracy is below kLearnedTrainAcc gets a trailing "*"; a cell
// with no successful run is just "*".
std::string render_markdown(const SweepResult& result);

void write_curve_csv(std::ostream& out, const LearningCurve& curve);

// ---- key=value files -------------------------------------------------------------

// Lines "key=value"; blank lines and lines starting with '#' are skipped.
// Later keys override earlier ones but order of first appearance is kept.
std::vector<std::pair<std::string, std::string>> read_key_values(
    const std::filesystem::path& path);
std::vector<std::pair<std::string, std::string>> parse_key_values(
    std::istream& in, const std::string& source);

// "0.1,0.25, 1" -> {0.1, 0.25, 1}
std::vector<double> parse_double_list(std::string_view text);
std::vector<std::uint64_t> parse_seed_list(std::string_view text);
// Shortest decimal form that parses back to the same double.
std::string format_number(double v);

}  // namespace debias
