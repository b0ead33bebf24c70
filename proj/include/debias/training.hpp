#pragma once

// Training objectives and the SGD loop.
//
// Every objective returns one scalar root whose reverse sweep produces the
// update direction for *all* parameter groups at once. Terms that a group
// must ascend are routed through grad_reverse, terms it must ignore through
// grad_block, and head weights that learn at a different rate through
// grad_scale. Minimizing the root with plain SGD then realizes, per group
// (n = batch size, NLL_phi = hypothesis-only head):
//
// baseline   theta: descend  mean NLL(y | P, H)
//
// method1, reversal routing: the adversary loss has weight alpha and a
// reversal layer scaled by beta sits between hypothesis encoder and head
//            hyp enc:     mean NLL - alpha * beta * mean NLL_phi
//            premise enc, classifier: mean NLL
//            phi:         alpha * mean NLL_phi
// method1, literal routing
//            theta:       mean NLL - alpha * mean NLL_phi
//            phi:         beta * mean NLL_phi
//
// method2: a fraction alpha of the batch has its premise replaced by one
// drawn from another training example (label kept); swapped rows never
// reach the premise encoder.
//   reversal routing (reversal layer scaled by beta on swapped rows)
//            premise enc: 1/n sum_real NLL
//            hyp enc:     1/n sum_real NLL - beta/n sum_swapped NLL
//            classifier:  1/n sum_real NLL + 1/n sum_swapped NLL
//   literal routing
//            premise enc: (1-alpha)/n sum_real NLL
//            hyp enc:     (1-alpha)/n sum_real NLL - alpha/n sum_swapped NLL
//            classifier:  (1-alpha)/n sum_real NLL + beta/n sum_swapped NLL
//
// hyp_only   hyp enc + phi: descend mean NLL_phi(y | H)  (bias probe)

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "debias/autodiff.hpp"
#include "debias/data_io.hpp"
#include "debias/model.hpp"

namespace debias {

enum class Method { kBaseline, kMethod1, kMethod2, kHypothesisOnly };

std::string_view to_string(Method m);
Method parse_method(std::string_view text);

enum class StopRule {
  kConverge,   // epoch objective changes by less than `loss_tol`, or (when
               // acc_streak > 0) train accuracy 1.0 for that many epochs,
               // or max_epochs
  kMaxEpochs,  // always run max_epochs
};

std::string_view to_string(StopRule r);
StopRule parse_stop_rule(std::string_view text);

// How alpha and beta enter the adversarial objectives (see above).
enum class Routing { kReversal, kLiteral };

std::string_view to_string(Routing r);
Routing parse_routing(std::string_view text);

struct TrainConfig {
  Method method = Method::kBaseline;
  double alpha = 0.0;
  double beta = 0.0;
  Routing routing = Routing::kReversal;
  double lr = 0.1;
  // Step shrinks to lr * clip_norm / |g| when the gradient norm exceeds it;
  // 0 disables.
  double clip_norm = 5.0;
  int max_epochs = 2000;
  std::size_t batch_size = 0;  // 0: full batch
  std::uint64_t seed = 1;
  StopRule stop = StopRule::kConverge;
  int acc_streak = 0;
  double loss_tol = 1e-8;
  int eval_each = 1;

  void validate() const;
  // Flat key=value rendering, parseable by apply_config_value.
  std::string to_config_text() const;
  bool operator==(const TrainConfig&) const = default;
};

// Applies one "key=value" setting; false if the key is not a TrainConfig key.
bool apply_config_value(TrainConfig& cfg, std::string_view key,
                        std::string_view value);

struct SwapRecord {
  std::size_t example = 0;  // index into the training set
  std::size_t donor = 0;    // whose premise was substituted
  int epoch = 0;

  bool operator==(const SwapRecord&) const = default;
};

struct EpochStats {
  int epoch = 0;
  double main_loss = 0.0;
  double adv_loss = 0.0;
  double train_acc = 0.0;

  bool operator==(const EpochStats&) const = default;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  int epochs_run = 0;
  bool converged = false;
  int best_epoch = 0;     // epoch of the returned snapshot
  double best_dev_acc = -1.0;  // -1 without dev data
  std::size_t swaps = 0;  // total premise substitutions (method2)

  bool operator==(const TrainReport&) const = default;
};

// CSV rows: epoch,main_loss,adv_loss,train_acc
void write_report_csv(std::ostream& out, const TrainReport& report);

// ---- objectives --------------------------------------------------------------

struct LossTerms {
  Var root;               // minimize this
  double main = 0.0;      // mean NLL of the full model on real pairs
  double adv = 0.0;       // mean NLL of the adversarial/hypothesis-only term
};

LossTerms loss_baseline(Tape& tape, const ModelParams& m,
                        std::span<const IndexedExample> batch);

LossTerms loss_method1(Tape& tape, const ModelParams& m,
                       std::span<const IndexedExample> batch, double alpha,
                       double beta, Routing routing = Routing::kReversal);

// floor(alpha * |batch|) positions chosen by a seeded shuffle; each gets a
// donor drawn uniformly from [0, pool_size) minus its own index.
std::vector<SwapRecord> select_swaps(std::span<const std::size_t> batch_ids,
                                     std::size_t pool_size, double alpha,
                                     int epoch, std::mt19937_64& rng);

struct PremiseSwap {
  std::size_t position = 0;  // row within the batch
  std::vector<int> premise;  // replacement premise tokens
};

std::vector<PremiseSwap> resolve_swaps(std::span<const SwapRecord> records,
                                       std::span<const std::size_t> batch_ids,
                                       std::span<const IndexedExample> pool);

LossTerms loss_method2(Tape& tape, const ModelParams& m,
                       std::span<const IndexedExample> batch,
                       std::span<const PremiseSwap> swaps, double alpha,
                       double beta, Routing routing = Routing::kReversal);

LossTerms loss_hypothesis_only(Tape& tape, const ModelParams& m,
                               std::span<const IndexedExample> batch);

// Objective each group's routed gradient must equal, evaluated with plain
// forward values (no routing nodes). For groups an objective leaves
// untouched this is 0.
double group_objective(ParamGroup group, const TrainConfig& cfg,
                       const ModelParams& m,
                       std::span<const IndexedExample> batch,
                       std::span<const PremiseSwap> swaps);

// Routed gradient for cfg.method on the batch.
Gradients objective_gradients(const TrainConfig& cfg, const ModelParams& m,
                              std::span<const IndexedExample> batch,
                              std::span<const PremiseSwap> swaps);

// Finite-difference check of every parameter group against group_objective.
std::map<ParamGroup, GradCheckResult> check_gradients(
    const TrainConfig& cfg, ModelParams& m,
    std::span<const IndexedExample> batch, std::span<const PremiseSwap> swaps,
    double epsilon = 1e-5);

// ---- training ------------------------------------------------------------------

struct TrainResult {
  ModelParams params;
  TrainReport report;
};

// Plain SGD. With dev data the best-on-dev snapshot is returned (later epochs
// win ties, the initial parameters count as epoch 0); otherwise the final
// parameters. Throws Error(kNumerical) naming epoch and config on divergence.
TrainResult train(ModelParams init, std::span<const IndexedExample> train_set,
                  std::span<const IndexedExample> dev, const TrainConfig& cfg);

// Continues from `pretrained` with the baseline objective on `subset`,
// selecting on the subset itself. An empty subset returns the input.
TrainResult fine_tune(const ModelParams& pretrained,
                      std::span<const IndexedExample> subset,
                      TrainConfig cfg);

// Fraction of examples whose predicted label index equals the gold index.
// Hypothesis-only prediction when `hypothesis_only` is set.
double accuracy(const ModelParams& m, std::span<const IndexedExample> data,
                bool hypothesis_only = false);

// Accuracy against string gold labels after mapping predictions through
// `label_map` (whose source space must be the model's label space).
double evaluate(const ModelParams& m, const Vocabulary& vocab,
                const Dataset& data, const LabelMap& label_map);

}  // namespace debias
