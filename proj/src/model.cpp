#include "debias/model.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "debias/error.hpp"

namespace debias {

// ---- Vocabulary ----------------------------------------------------------------

Vocabulary::Vocabulary() {
  add(std::string(kPadToken));
  add(std::string(kUnkToken));
}

int Vocabulary::add(const std::string& token) {
  if (auto it = index_.find(token); it != index_.end()) return it->second;
  const int idx = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, idx);
  return idx;
}

int Vocabulary::index(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens,
                                    std::size_t* unknown) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    const int idx = index(t);
    if (idx == kUnk && unknown) ++*unknown;
    out.push_back(idx);
  }
  return out;
}

// ---- enums ---------------------------------------------------------------------

std::string_view to_string(EncoderVariant v) {
  switch (v) {
    case EncoderVariant::kBag: return "bag";
    case EncoderVariant::kMean: return "mean";
    case EncoderVariant::kRecurrent: return "recurrent";
  }
  return "?";
}

EncoderVariant parse_encoder_variant(std::string_view text) {
  if (text == "bag" || text == "bag_of_embeddings") return EncoderVariant::kBag;
  if (text == "mean" || text == "mean_of_embeddings") return EncoderVariant::kMean;
  if (text == "recurrent" || text == "simple_recurrent") {
    return EncoderVariant::kRecurrent;
  }
  throw UsageError("unknown encoder variant '" + std::string(text) + "'");
}

std::string_view to_string(CombineMode m) {
  return m == CombineMode::kConcat ? "concat" : "infersent";
}

CombineMode parse_combine_mode(std::string_view text) {
  if (text == "concat") return CombineMode::kConcat;
  if (text == "infersent") return CombineMode::kInferSent;
  throw UsageError("unknown combine mode '" + std::string(text) + "'");
}

void EncoderKind::validate() const {
  if (dim == 0) throw UsageError("encoder: dim must be positive");
  if (variant == EncoderVariant::kRecurrent && hidden == 0) {
    throw UsageError("encoder: recurrent encoder needs hidden > 0");
  }
}

ModelSpec ModelSpec::synthetic(std::vector<std::string> labels) {
  ModelSpec s;
  s.encoder = EncoderKind{EncoderVariant::kBag, 10, 0};
  s.combine = CombineMode::kConcat;
  s.mlp_hidden = 20;
  s.labels = std::move(labels);
  return s;
}

ModelSpec ModelSpec::text(std::vector<std::string> labels) {
  ModelSpec s;
  s.encoder = EncoderKind{EncoderVariant::kRecurrent, 50, 64};
  s.combine = CombineMode::kInferSent;
  s.mlp_hidden = 64;
  s.labels = std::move(labels);
  return s;
}

void ModelSpec::validate() const {
  encoder.validate();
  if (mlp_hidden == 0) throw UsageError("model: mlp_hidden must be positive");
  if (labels.size() < 2) throw UsageError("model: need at least 2 labels");
}

std::size_t ModelSpec::feature_width() const {
  const std::size_t w = encoder.output_width();
  return combine == CombineMode::kConcat ? 2 * w : 4 * w;
}

// ---- parameters ------------------------------------------------------------------

const Parameter& ModelParams::get(std::string_view name) const {
  for (const auto& p : params) {
    if (p.name() == name) return p;
  }
  throw UsageError("model has no parameter '" + std::string(name) + "'");
}

Parameter& ModelParams::get(std::string_view name) {
  return const_cast<Parameter&>(std::as_const(*this).get(name));
}

std::vector<Parameter*> ModelParams::group(ParamGroup g) {
  std::vector<Parameter*> out;
  for (auto& p : params) {
    if (p.group() == g) out.push_back(&p);
  }
  return out;
}

std::vector<Parameter*> ModelParams::all() {
  std::vector<Parameter*> out;
  for (auto& p : params) out.push_back(&p);
  return out;
}

namespace {

struct ParamDecl {
  std::string name;
  ParamGroup group;
  Shape shape;
  bool is_bias;
};

std::vector<ParamDecl> layout(const ModelSpec& spec, std::size_t vocab) {
  std::vector<ParamDecl> out;
  const auto& enc = spec.encoder;
  auto encoder = [&](const std::string& prefix, ParamGroup g) {
    out.push_back({prefix + ".embedding", g, {vocab, enc.dim}, false});
    if (enc.variant == EncoderVariant::kRecurrent) {
      out.push_back({prefix + ".w_in", g, {enc.dim, enc.hidden}, false});
      out.push_back({prefix + ".w_rec", g, {enc.hidden, enc.hidden}, false});
      out.push_back({prefix + ".bias", g, {enc.hidden}, true});
    }
  };
  auto mlp = [&](const std::string& prefix, ParamGroup g, std::size_t in) {
    out.push_back({prefix + ".w1", g, {in, spec.mlp_hidden}, false});
    out.push_back({prefix + ".b1", g, {spec.mlp_hidden}, true});
    out.push_back({prefix + ".w2", g, {spec.mlp_hidden, spec.labels.size()}, false});
    out.push_back({prefix + ".b2", g, {spec.labels.size()}, true});
  };
  encoder("premise", ParamGroup::kPremiseEncoder);
  encoder("hypothesis", ParamGroup::kHypothesisEncoder);
  mlp("classifier", ParamGroup::kClassifier, spec.feature_width());
  mlp("hyp_head", ParamGroup::kHypothesisHead, enc.output_width());
  return out;
}

std::string side_prefix(Side side) {
  return side == Side::kPremise ? "premise" : "hypothesis";
}

Var mlp_forward(Tape& tape, const ModelParams& m, const std::string& prefix,
                Var x, double factor) {
  auto leaf = [&](const char* suffix) {
    Var v = tape.param(m.get(prefix + suffix));
    return factor == 1.0 ? v : grad_scale(v, factor);
  };
  const std::size_t in = m.get(prefix + ".w1").value.rows();
  if (x.value().cols() != in) {
    throw UsageError(prefix + ": input width " +
                     std::to_string(x.value().cols()) + " but layer expects " +
                     std::to_string(in));
  }
  Var h = tanh(add_bias(matmul(x, leaf(".w1")), leaf(".b1")));
  Var logits = add_bias(matmul(h, leaf(".w2")), leaf(".b2"));
  return log_softmax(logits);
}

Tensor as_vector(const Tensor& t) {
  return Tensor::vector(std::vector<double>(t.data().begin(), t.data().end()));
}

}  // namespace

std::string_view to_string(InitScheme s) {
  return s == InitScheme::kFramework ? "framework" : "uniform";
}

InitScheme parse_init_scheme(std::string_view text) {
  if (text == "framework") return InitScheme::kFramework;
  if (text == "uniform") return InitScheme::kSmallUniform;
  throw UsageError("unknown init scheme '" + std::string(text) + "'");
}

ModelParams init_params(const ModelSpec& spec, std::size_t vocab_size,
                        std::uint64_t seed, InitScheme scheme) {
  spec.validate();
  if (vocab_size < 2) throw UsageError("init_params: vocabulary too small");
  ModelParams m;
  m.spec = spec;
  m.vocab_size = vocab_size;
  std::mt19937_64 rng(seed);
  const bool fw = scheme == InitScheme::kFramework;
  int id = 0;
  std::size_t last_fan_in = 1;
  for (const auto& d : layout(spec, vocab_size)) {
    Tensor value(d.shape);
    if (fw) {
      if (d.name.find("embedding") != std::string::npos) {
        std::normal_distribution<double> nd(0.0, 1.0);
        for (auto& x : value.data()) x = nd(rng);
      } else {
        const std::size_t fan_in = d.is_bias ? last_fan_in : d.shape[0];
        last_fan_in = fan_in;
        const double b = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> u(-b, b);
        for (auto& x : value.data()) x = u(rng);
      }
    } else if (!d.is_bias) {
      std::uniform_real_distribution<double> uni(-0.1, 0.1);
      for (auto& x : value.data()) x = uni(rng);
    }
    m.params.emplace_back(id++, d.name, d.group, std::move(value));
  }
  return m;
}

Var encode_batch(Tape& tape, const ModelParams& m, Side side,
                 const TokenBatch& tokens) {
  const std::string prefix = side_prefix(side);
  const auto& enc = m.spec.encoder;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].empty()) {
      throw UsageError("encode: empty " + prefix + " at batch row " +
                       std::to_string(i));
    }
    for (int t : tokens[i]) {
      if (t < 0 || static_cast<std::size_t>(t) >= m.vocab_size) {
        throw UsageError("encode: token index " + std::to_string(t) +
                         " outside vocabulary of " +
                         std::to_string(m.vocab_size));
      }
    }
  }
  Var table = tape.param(m.get(prefix + ".embedding"));
  if (enc.variant != EncoderVariant::kRecurrent) {
    return embedding_bag(table, tokens, enc.variant == EncoderVariant::kMean);
  }
  Var w_in = tape.param(m.get(prefix + ".w_in"));
  Var w_rec = tape.param(m.get(prefix + ".w_rec"));
  Var bias = tape.param(m.get(prefix + ".bias"));
  std::vector<Var> finals;
  finals.reserve(tokens.size());
  for (const auto& seq : tokens) {
    Var h = tape.constant(Tensor(Shape{1, enc.hidden}));
    for (const int& t : seq) {
      const std::span<const int> one(&t, 1);
      Var x = embedding_bag(table, std::span(&one, 1), false);
      h = tanh(add_bias(add(matmul(x, w_in), matmul(h, w_rec)), bias));
    }
    finals.push_back(h);
  }
  return vstack(finals);
}

Var combine(Var u, Var v, CombineMode mode) {
  if (mode == CombineMode::kConcat) return concat({u, v});
  if (u.shape() != v.shape()) {
    throw UsageError("combine(infersent): shape mismatch " +
                     shape_string(u.shape()) + " vs " + shape_string(v.shape()));
  }
  return concat({u, v, sub(u, v), mul(u, v)});
}

Var classify(Tape& tape, const ModelParams& m, Var features,
             double param_grad_factor) {
  return mlp_forward(tape, m, "classifier", features, param_grad_factor);
}

Var hypothesis_head(Tape& tape, const ModelParams& m, Var hyp,
                    double param_grad_factor) {
  return mlp_forward(tape, m, "hyp_head", hyp, param_grad_factor);
}

namespace {

void split_batch(std::span<const IndexedExample> batch, TokenBatch& premises,
                 TokenBatch& hypotheses) {
  premises.reserve(batch.size());
  hypotheses.reserve(batch.size());
  for (const auto& ex : batch) {
    premises.push_back(ex.premise);
    hypotheses.push_back(ex.hypothesis);
  }
}

}  // namespace

Var forward_log_probs(Tape& tape, const ModelParams& m,
                      std::span<const IndexedExample> batch) {
  TokenBatch premises, hypotheses;
  split_batch(batch, premises, hypotheses);
  Var u = encode_batch(tape, m, Side::kPremise, premises);
  Var v = encode_batch(tape, m, Side::kHypothesis, hypotheses);
  return classify(tape, m, combine(u, v, m.spec.combine));
}

Tensor encode(std::span<const int> tokens, Side side, const ModelParams& m) {
  Tape tape;
  Var out = encode_batch(tape, m, side, TokenBatch{tokens});
  return as_vector(out.value());
}

Tensor combine(const Tensor& u, const Tensor& v, CombineMode mode) {
  Tape tape;
  return combine(tape.constant(u), tape.constant(v), mode).value();
}

Tensor classify(const Tensor& features, const ModelParams& m) {
  Tape tape;
  return classify(tape, m, tape.constant(features)).value();
}

Tensor hypothesis_head(const Tensor& hyp, const ModelParams& m) {
  Tape tape;
  return hypothesis_head(tape, m, tape.constant(hyp)).value();
}

int argmax(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = static_cast<int>(i);
  }
  return best;
}

int predict(const IndexedExample& example, const ModelParams& m) {
  return predict_batch(m, std::span(&example, 1)).front();
}

namespace {

std::vector<int> row_argmax(const Tensor& lp) {
  std::vector<int> out(lp.rows());
  const std::size_t cols = lp.cols();
  for (std::size_t r = 0; r < lp.rows(); ++r) {
    out[r] = argmax(lp.data().subspan(r * cols, cols));
  }
  return out;
}

}  // namespace

std::vector<int> predict_batch(const ModelParams& m,
                               std::span<const IndexedExample> examples) {
  if (examples.empty()) return {};
  Tape tape;
  return row_argmax(forward_log_probs(tape, m, examples).value());
}

std::vector<int> predict_hypothesis_only(
    const ModelParams& m, std::span<const IndexedExample> examples) {
  if (examples.empty()) return {};
  TokenBatch hyps;
  for (const auto& ex : examples) hyps.push_back(ex.hypothesis);
  Tape tape;
  Var v = encode_batch(tape, m, Side::kHypothesis, hyps);
  return row_argmax(hypothesis_head(tape, m, v).value());
}

// ---- checkpoints ------------------------------------------------------------------

namespace {

constexpr std::string_view kMagic = "debias-checkpoint";
constexpr int kVersion = 1;

std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

[[noreturn]] void bad_checkpoint(const std::filesystem::path& path,
                                 std::size_t line, const std::string& why) {
  throw DataError(path.string() + ":" + std::to_string(line) +
                  ": bad checkpoint: " + why);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Vocabulary& vocab,
                     const ModelParams& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  const auto& s = model.spec;
  out << kMagic << ' ' << kVersion << '\n';
  out << "encoder " << to_string(s.encoder.variant) << ' ' << s.encoder.dim
      << ' ' << s.encoder.hidden << '\n';
  out << "combine " << to_string(s.combine) << '\n';
  out << "mlp_hidden " << s.mlp_hidden << '\n';
  out << "labels " << s.labels.size() << '\n';
  for (const auto& l : s.labels) out << l << '\n';
  out << "vocab " << vocab.size() << '\n';
  for (const auto& t : vocab.tokens()) out << t << '\n';
  out << "params " << model.params.size() << '\n';
  for (const auto& p : model.params) {
    out << "param " << p.id() << ' ' << p.name() << ' ' << to_string(p.group())
        << ' ' << p.value.rank();
    for (auto d : p.value.shape()) out << ' ' << d;
    out << '\n';
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      out << (i ? " " : "") << hex_double(p.value[i]);
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read checkpoint " + path.string());
  std::size_t lineno = 0;
  std::string line;
  auto next = [&]() -> std::string& {
    if (!std::getline(in, line)) bad_checkpoint(path, lineno, "truncated");
    ++lineno;
    return line;
  };
  auto header = [&](std::string_view key) {
    std::istringstream ss(next());
    std::string k;
    ss >> k;
    if (k != key) bad_checkpoint(path, lineno, "expected '" + std::string(key) + "'");
    return ss;
  };

  {
    auto ss = header(kMagic);
    int version = 0;
    ss >> version;
    if (version != kVersion) {
      bad_checkpoint(path, lineno, "unsupported version " + std::to_string(version));
    }
  }
  Checkpoint ck;
  ModelSpec& s = ck.model.spec;
  {
    auto ss = header("encoder");
    std::string variant;
    ss >> variant >> s.encoder.dim >> s.encoder.hidden;
    if (!ss) bad_checkpoint(path, lineno, "malformed encoder line");
    s.encoder.variant = parse_encoder_variant(variant);
  }
  {
    auto ss = header("combine");
    std::string mode;
    ss >> mode;
    s.combine = parse_combine_mode(mode);
  }
  header("mlp_hidden") >> s.mlp_hidden;
  std::size_t count = 0;
  header("labels") >> count;
  for (std::size_t i = 0; i < count; ++i) s.labels.push_back(next());
  header("vocab") >> count;
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < count; ++i) tokens.push_back(next());
  if (tokens.size() < 2 || tokens[0] != Vocabulary::kPadToken ||
      tokens[1] != Vocabulary::kUnkToken) {
    bad_checkpoint(path, lineno, "vocabulary must start with <pad>, <unk>");
  }
  for (std::size_t i = 2; i < tokens.size(); ++i) ck.vocab.add(tokens[i]);
  if (ck.vocab.size() != tokens.size()) {
    bad_checkpoint(path, lineno, "duplicate vocabulary entries");
  }
  ck.model.vocab_size = ck.vocab.size();

  // Validates the declared layout against the architecture before reading.
  const ModelParams expected = init_params(s, ck.model.vocab_size, 0);
  header("params") >> count;
  if (count != expected.params.size()) {
    bad_checkpoint(path, lineno, "parameter count does not match architecture");
  }
  for (std::size_t i = 0; i < count; ++i) {
    auto ss = header("param");
    int id = -1;
    std::string name, group;
    std::size_t rank = 0;
    ss >> id >> name >> group >> rank;
    Shape shape(rank);
    for (auto& d : shape) ss >> d;
    if (!ss) bad_checkpoint(path, lineno, "malformed param header");
    const Parameter& ref = expected.params[i];
    if (id != ref.id() || name != ref.name() || shape != ref.value.shape() ||
        parse_param_group(group) != ref.group()) {
      bad_checkpoint(path, lineno, "parameter '" + name + "' does not match architecture");
    }
    std::istringstream vs(next());
    std::vector<double> values;
    std::string tok;
    while (vs >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') {
        bad_checkpoint(path, lineno, "bad number '" + tok + "'");
      }
      values.push_back(v);
    }
    if (values.size() != ref.value.size()) {
      bad_checkpoint(path, lineno, "value count mismatch for " + name);
    }
    ck.model.params.emplace_back(id, name, ref.group(),
                                 Tensor(shape, std::move(values)));
  }
  return ck;
}

}  // namespace debias
