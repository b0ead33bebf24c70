#pragma once

// Toy entailment data: P entails H iff their first symbols match.
// Dataset A uses single symbols from {a, b}; dataset B is A with an artifact
// symbol 'c' appended to every entailed hypothesis, so the label can be read
// off the hypothesis alone.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "debias/data_io.hpp"

namespace debias {

inline constexpr const char* kTrueLabel = "TRUE";
inline constexpr const char* kFalseLabel = "FALSE";

struct SynthExample {
  std::string premise;
  std::string hypothesis;
  bool label = false;

  bool operator==(const SynthExample&) const = default;
  auto operator<=>(const SynthExample&) const = default;
};

enum class SynthVariant { kA, kB };

// n/4 each of (a,a,T), (b,b,T), (a,b,F), (b,a,F), shuffled by seed.
// n must be a positive multiple of 4.
std::vector<SynthExample> gen_dataset_A(std::size_t n, std::uint64_t seed);
// gen_dataset_A(n, seed) with 'c' appended to every TRUE hypothesis.
std::vector<SynthExample> gen_dataset_B(std::size_t n, std::uint64_t seed);
std::vector<SynthExample> gen_dataset(SynthVariant v, std::size_t n,
                                      std::uint64_t seed);

// Character-tokenized dataset with labels TRUE/FALSE.
Dataset to_dataset(std::span<const SynthExample> examples, std::string name);

struct BiasAudit {
  bool separator_found = false;
  // Hypothesis token whose presence is equivalent to `label`.
  std::string feature;
  std::string label;
  // Fewer than two distinct labels: anything separates vacuously.
  bool degenerate_labels = false;
};

// Exhaustive search over single-token presence rules on the hypothesis side.
BiasAudit audit_bias(const Dataset& data);
BiasAudit audit_bias(std::span<const SynthExample> examples);

// Label the audited presence rule assigns to a hypothesis: the audited label
// when the feature is present, otherwise the other label of `label_space`
// (binary spaces only).
std::string apply_bias_rule(const BiasAudit& audit,
                            const std::vector<std::string>& hypothesis,
                            const std::vector<std::string>& label_space);

}  // namespace debias
