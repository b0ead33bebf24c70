#pragma once

// Dataset files, vocabularies, pre-trained embeddings and label-space
// mappings between a model's labels and a target dataset's labels.
//
// Dataset TSV: UTF-8, no header, one example per line:
//   premise <TAB> hypothesis <TAB> label

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "debias/autodiff.hpp"
#include "debias/model.hpp"

namespace debias {

struct Example {
  std::vector<std::string> premise;
  std::vector<std::string> hypothesis;
  std::string label;

  bool operator==(const Example&) const = default;
};

struct Dataset {
  std::string name;
  std::vector<Example> examples;
  std::vector<std::string> label_space;  // sorted, unique

  bool operator==(const Dataset&) const = default;
};

enum class Tokenization {
  kWhitespace,  // lowercase, split on whitespace
  kCharacter,   // every non-space character is a token
};

std::string_view to_string(Tokenization t);
Tokenization parse_tokenization(std::string_view text);

std::vector<std::string> tokenize(std::string_view text, Tokenization mode);
// Sorted unique labels of the examples.
std::vector<std::string> label_space_of(std::span<const Example> examples);

Dataset load_tsv(const std::filesystem::path& path, Tokenization mode);
void write_tsv(const std::filesystem::path& path, const Dataset& data,
               Tokenization mode);

// Tokens seen at least `min_count` times across the given (training)
// datasets, indexed in sorted order after <pad> and <unk>.
Vocabulary build_vocab(std::span<const Dataset* const> datasets,
                       std::size_t min_count);
Vocabulary build_vocab(const Dataset& data, std::size_t min_count = 1);

struct IndexedDataset {
  std::vector<IndexedExample> examples;
  std::size_t unknown_tokens = 0;
};

// Maps tokens through `vocab` (unseen -> UNK) and labels through
// `label_space`; a gold label outside the label space is a data error.
IndexedDataset index_dataset(const Dataset& data, const Vocabulary& vocab,
                             const std::vector<std::string>& label_space);

struct EmbeddingTable {
  Tensor table;  // (|V| x dim)
  double coverage = 0.0;  // fraction of non-special tokens found in the file
};

// Text format "token v1 ... v_dim" per line. Rows missing from the file are
// drawn uniform(-0.1, 0.1) from `seed`.
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               const Vocabulary& vocab, std::size_t dim,
                               std::uint64_t seed);

enum class LabelMapKind {
  kIdentity,
  kThreeToBinaryEntailed,  // entailment -> entailed, else not-entailed
  kThreeToSciTail,         // contradiction -> neutral
  kJociOrdinalToThree,     // 1 -> contradiction, 2-4 -> neutral, 5 -> entailment
};

std::string_view to_string(LabelMapKind k);
LabelMapKind parse_label_map_kind(std::string_view text);

std::string map_label(std::string_view source_label, LabelMapKind kind);

// Total function from the labels a model predicts to a target label space.
class LabelMap {
 public:
  LabelMap(LabelMapKind kind, std::vector<std::string> source_space);

  const std::vector<std::string>& source_space() const { return source_; }
  const std::vector<std::string>& target_space() const { return target_; }
  LabelMapKind kind() const { return kind_; }
  // Error for labels outside the source space.
  const std::string& apply(std::string_view source_label) const;

 private:
  LabelMapKind kind_;
  std::vector<std::string> source_;
  std::vector<std::string> target_;
  std::map<std::string, std::string, std::less<>> table_;
};

}  // namespace debias
