#pragma once

// Premise/hypothesis classifier: one encoder per side, a pair combiner, the
// main classifier g_theta and the hypothesis-only head g_phi.
//
//   premise tokens    -> f_P -> u -+
//                                   +- combine -> g_theta -> log p(y | P, H)
//   hypothesis tokens -> f_H -> v -+
//                                   +- g_phi -> log p(y | H)
//
// Each side owns its embedding table, so the premise-encoder parameter group
// can be frozen or blocked without touching the hypothesis side.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "debias/autodiff.hpp"

namespace debias {

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();

  // Returns the existing index when the token is already present.
  int add(const std::string& token);
  // UNK for unknown tokens.
  int index(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(int index) const { return tokens_.at(index); }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  // Maps tokens to indices; `unknown` (if given) counts UNK substitutions.
  std::vector<int> encode(const std::vector<std::string>& tokens,
                          std::size_t* unknown = nullptr) const;

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

enum class EncoderVariant { kBag, kMean, kRecurrent };
enum class CombineMode { kConcat, kInferSent };

std::string_view to_string(EncoderVariant v);
EncoderVariant parse_encoder_variant(std::string_view text);
std::string_view to_string(CombineMode m);
CombineMode parse_combine_mode(std::string_view text);

struct EncoderKind {
  EncoderVariant variant = EncoderVariant::kBag;
  std::size_t dim = 10;
  std::size_t hidden = 0;  // recurrent state width

  void validate() const;
  std::size_t output_width() const {
    return variant == EncoderVariant::kRecurrent ? hidden : dim;
  }
  bool operator==(const EncoderKind&) const = default;
};

// Architecture of a model; everything needed to allocate its parameters.
struct ModelSpec {
  EncoderKind encoder;
  CombineMode combine = CombineMode::kConcat;
  std::size_t mlp_hidden = 20;
  std::vector<std::string> labels;  // label space the model predicts

  // Character model used for the synthetic experiments: 10-d embeddings
  // summed per string, concatenated pair, 20-unit MLPs.
  static ModelSpec synthetic(std::vector<std::string> labels);
  // Desk-scale stand-in for a sentence encoder on real text.
  static ModelSpec text(std::vector<std::string> labels);

  void validate() const;
  std::size_t feature_width() const;
  bool operator==(const ModelSpec&) const = default;
};

enum class Side { kPremise, kHypothesis };

struct ModelParams {
  ModelSpec spec;
  std::size_t vocab_size = 0;
  // Parameter ids equal their position here.
  std::vector<Parameter> params;

  const Parameter& get(std::string_view name) const;
  Parameter& get(std::string_view name);
  std::vector<Parameter*> group(ParamGroup g);
  std::vector<Parameter*> all();
};

enum class InitScheme {
  // Embeddings N(0, 1); weights and biases uniform(-1/sqrt(fan_in), +).
  kFramework,
  // Weights and embeddings uniform(-0.1, 0.1), biases zero.
  kSmallUniform,
};

std::string_view to_string(InitScheme s);
InitScheme parse_init_scheme(std::string_view text);

ModelParams init_params(const ModelSpec& spec, std::size_t vocab_size,
                        std::uint64_t seed,
                        InitScheme scheme = InitScheme::kFramework);

struct IndexedExample {
  std::vector<int> premise;
  std::vector<int> hypothesis;
  int label = 0;
};

// Views into token storage that must outlive the forward pass.
using TokenBatch = std::vector<std::span<const int>>;

// ---- tape-level forward pieces ------------------------------------------

// (n x output_width) encodings of n token sequences with one side's encoder.
Var encode_batch(Tape& tape, const ModelParams& m, Side side,
                 const TokenBatch& tokens);
// concat: [u; v]; infersent: [u; v; u - v; u * v]. Row-wise for matrices.
Var combine(Var u, Var v, CombineMode mode);
// g_theta: tanh hidden layer, linear output, log-softmax. When
// `param_grad_factor` != 1 the classifier weights enter through grad_scale,
// which scales only the gradient they receive from this use.
Var classify(Tape& tape, const ModelParams& m, Var features,
             double param_grad_factor = 1.0);
// g_phi on hypothesis encodings, same contract as classify.
Var hypothesis_head(Tape& tape, const ModelParams& m, Var hyp,
                    double param_grad_factor = 1.0);

// Main-path log-probabilities for a batch, (n x labels).
Var forward_log_probs(Tape& tape, const ModelParams& m,
                      std::span<const IndexedExample> batch);

// ---- single-example convenience API -----------------------------------------

Tensor encode(std::span<const int> tokens, Side side, const ModelParams& m);
Tensor combine(const Tensor& u, const Tensor& v, CombineMode mode);
Tensor classify(const Tensor& features, const ModelParams& m);
Tensor hypothesis_head(const Tensor& hyp, const ModelParams& m);

// Lowest index wins ties.
int argmax(std::span<const double> values);
int predict(const IndexedExample& example, const ModelParams& m);
std::vector<int> predict_batch(const ModelParams& m,
                               std::span<const IndexedExample> examples);
// Hypothesis-only predictions through g_phi.
std::vector<int> predict_hypothesis_only(
    const ModelParams& m, std::span<const IndexedExample> examples);

// ---- checkpoints --------------------------------------------------------------

struct Checkpoint {
  Vocabulary vocab;
  ModelParams model;
};

// Line-oriented text container; tensor values are written as hex floats so
// a save/load round trip is value-exact.
void save_checkpoint(const std::filesystem::path& path, const Vocabulary& vocab,
                     const ModelParams& model);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace debias
