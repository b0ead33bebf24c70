#include "debias/data_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "debias/error.hpp"

namespace debias {

std::string_view to_string(Tokenization t) {
  return t == Tokenization::kWhitespace ? "whitespace" : "char";
}

Tokenization parse_tokenization(std::string_view text) {
  if (text == "whitespace" || text == "word") return Tokenization::kWhitespace;
  if (text == "char" || text == "character") return Tokenization::kCharacter;
  throw UsageError("unknown tokenization '" + std::string(text) + "'");
}

std::vector<std::string> tokenize(std::string_view text, Tokenization mode) {
  std::vector<std::string> out;
  if (mode == Tokenization::kCharacter) {
    for (char c : text) {
      if (!std::isspace(static_cast<unsigned char>(c))) out.emplace_back(1, c);
    }
    return out;
  }
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> label_space_of(std::span<const Example> examples) {
  std::set<std::string> labels;
  for (const auto& ex : examples) labels.insert(ex.label);
  return {labels.begin(), labels.end()};
}

Dataset load_tsv(const std::filesystem::path& path, Tokenization mode) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  Dataset data;
  data.name = path.stem().string();
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 3) {
      fail("expected 3 tab-separated columns, got " + std::to_string(cols.size()));
    }
    Example ex{tokenize(cols[0], mode), tokenize(cols[1], mode), cols[2]};
    if (ex.premise.empty()) fail("empty premise");
    if (ex.hypothesis.empty()) fail("empty hypothesis");
    if (ex.label.empty()) fail("empty label");
    data.examples.push_back(std::move(ex));
  }
  if (data.examples.empty()) throw DataError(path.string() + ": no examples");
  data.label_space = label_space_of(data.examples);
  return data;
}

void write_tsv(const std::filesystem::path& path, const Dataset& data,
               Tokenization mode) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  const char* sep = mode == Tokenization::kCharacter ? "" : " ";
  auto join = [&](const std::vector<std::string>& toks) {
    std::string s;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (i) s += sep;
      s += toks[i];
    }
    return s;
  };
  for (const auto& ex : data.examples) {
    out << join(ex.premise) << '\t' << join(ex.hypothesis) << '\t' << ex.label
        << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

Vocabulary build_vocab(std::span<const Dataset* const> datasets,
                       std::size_t min_count) {
  if (min_count < 1) throw UsageError("build_vocab: min_count must be >= 1");
  std::unordered_map<std::string, std::size_t> counts;
  for (const Dataset* d : datasets) {
    for (const auto& ex : d->examples) {
      for (const auto& t : ex.premise) ++counts[t];
      for (const auto& t : ex.hypothesis) ++counts[t];
    }
  }
  std::vector<std::string> kept;
  for (const auto& [tok, n] : counts) {
    if (n >= min_count && tok != Vocabulary::kPadToken &&
        tok != Vocabulary::kUnkToken) {
      kept.push_back(tok);
    }
  }
  std::sort(kept.begin(), kept.end());
  Vocabulary vocab;
  for (const auto& t : kept) vocab.add(t);
  return vocab;
}

Vocabulary build_vocab(const Dataset& data, std::size_t min_count) {
  const Dataset* one[] = {&data};
  return build_vocab(one, min_count);
}

IndexedDataset index_dataset(const Dataset& data, const Vocabulary& vocab,
                             const std::vector<std::string>& label_space) {
  IndexedDataset out;
  out.examples.reserve(data.examples.size());
  for (std::size_t i = 0; i < data.examples.size(); ++i) {
    const auto& ex = data.examples[i];
    auto it = std::find(label_space.begin(), label_space.end(), ex.label);
    if (it == label_space.end()) {
      throw DataError(data.name + ": example " + std::to_string(i + 1) +
                      " has label '" + ex.label +
                      "' outside the model's label space");
    }
    out.examples.push_back(IndexedExample{
        vocab.encode(ex.premise, &out.unknown_tokens),
        vocab.encode(ex.hypothesis, &out.unknown_tokens),
        static_cast<int>(it - label_space.begin())});
  }
  return out;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               const Vocabulary& vocab, std::size_t dim,
                               std::uint64_t seed) {
  if (dim == 0) throw UsageError("load_embeddings: dim must be positive");
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());

  EmbeddingTable out{Tensor(Shape{vocab.size(), dim}), 0.0};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-0.1, 0.1);
  for (auto& x : out.table.data()) x = uni(rng);

  std::vector<char> found(vocab.size(), 0);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string token;
    if (!(ss >> token)) continue;
    std::vector<double> values;
    std::string num;
    while (ss >> num) {
      char* end = nullptr;
      const double v = std::strtod(num.c_str(), &end);
      if (end == num.c_str() || *end != '\0') {
        throw DataError(path.string() + ":" + std::to_string(lineno) +
                        ": bad number '" + num + "'");
      }
      values.push_back(v);
    }
    if (values.size() != dim) {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected " + std::to_string(dim) + " values, got " +
                      std::to_string(values.size()));
    }
    if (!vocab.contains(token)) continue;
    const int row = vocab.index(token);
    std::copy(values.begin(), values.end(), &out.table[row * dim]);
    found[row] = 1;
  }
  const std::size_t regular = vocab.size() - 2;
  std::size_t hits = 0;
  for (std::size_t i = 2; i < vocab.size(); ++i) hits += found[i];
  out.coverage = regular == 0 ? 0.0 : static_cast<double>(hits) / regular;
  return out;
}

std::string_view to_string(LabelMapKind k) {
  switch (k) {
    case LabelMapKind::kIdentity: return "identity";
    case LabelMapKind::kThreeToBinaryEntailed: return "three_to_binary_entailed";
    case LabelMapKind::kThreeToSciTail: return "three_to_scitail";
    case LabelMapKind::kJociOrdinalToThree: return "joci_ordinal_to_three";
  }
  return "?";
}

LabelMapKind parse_label_map_kind(std::string_view text) {
  for (auto k : {LabelMapKind::kIdentity, LabelMapKind::kThreeToBinaryEntailed,
                 LabelMapKind::kThreeToSciTail, LabelMapKind::kJociOrdinalToThree}) {
    if (to_string(k) == text) return k;
  }
  throw UsageError("unknown label map '" + std::string(text) + "'");
}

std::string map_label(std::string_view source_label, LabelMapKind kind) {
  const std::string s(source_label);
  auto unknown = [&]() {
    return UsageError("label map " + std::string(to_string(kind)) +
                      ": unknown source label '" + s + "'");
  };
  switch (kind) {
    case LabelMapKind::kIdentity:
      return s;
    case LabelMapKind::kThreeToBinaryEntailed:
      if (s == "entailment") return "entailed";
      if (s == "neutral" || s == "contradiction") return "not-entailed";
      throw unknown();
    case LabelMapKind::kThreeToSciTail:
      if (s == "contradiction") return "neutral";
      if (s == "entailment" || s == "neutral") return s;
      throw unknown();
    case LabelMapKind::kJociOrdinalToThree:
      if (s == "1") return "contradiction";
      if (s == "2" || s == "3" || s == "4") return "neutral";
      if (s == "5") return "entailment";
      throw unknown();
  }
  throw unknown();
}

LabelMap::LabelMap(LabelMapKind kind, std::vector<std::string> source_space)
    : kind_(kind), source_(std::move(source_space)) {
  std::set<std::string> target;
  for (const auto& s : source_) {
    auto t = map_label(s, kind_);
    target.insert(t);
    table_.emplace(s, std::move(t));
  }
  target_.assign(target.begin(), target.end());
}

const std::string& LabelMap::apply(std::string_view source_label) const {
  auto it = table_.find(source_label);
  if (it == table_.end()) {
    throw UsageError("label map " + std::string(to_string(kind_)) +
                     ": predicted label '" + std::string(source_label) +
                     "' is not mapped");
  }
  return it->second;
}

}  // namespace debias
