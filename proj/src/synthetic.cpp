#include "debias/synthetic.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "debias/error.hpp"

namespace debias {

std::vector<SynthExample> gen_dataset_A(std::size_t n, std::uint64_t seed) {
  if (n == 0 || n % 4 != 0) {
    throw UsageError("synthetic dataset size must be a positive multiple of 4, got " +
                     std::to_string(n));
  }
  static const SynthExample kPatterns[] = {
      {"a", "a", true}, {"b", "b", true}, {"a", "b", false}, {"b", "a", false}};
  std::vector<SynthExample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n / 4; ++i) {
    out.insert(out.end(), std::begin(kPatterns), std::end(kPatterns));
  }
  std::mt19937_64 rng(seed);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

std::vector<SynthExample> gen_dataset_B(std::size_t n, std::uint64_t seed) {
  auto out = gen_dataset_A(n, seed);
  for (auto& ex : out) {
    if (ex.label) ex.hypothesis += 'c';
  }
  return out;
}

std::vector<SynthExample> gen_dataset(SynthVariant v, std::size_t n,
                                      std::uint64_t seed) {
  return v == SynthVariant::kA ? gen_dataset_A(n, seed) : gen_dataset_B(n, seed);
}

Dataset to_dataset(std::span<const SynthExample> examples, std::string name) {
  Dataset d;
  d.name = std::move(name);
  d.examples.reserve(examples.size());
  for (const auto& ex : examples) {
    d.examples.push_back(Example{tokenize(ex.premise, Tokenization::kCharacter),
                                 tokenize(ex.hypothesis, Tokenization::kCharacter),
                                 ex.label ? kTrueLabel : kFalseLabel});
  }
  d.label_space = label_space_of(d.examples);
  return d;
}

BiasAudit audit_bias(const Dataset& data) {
  BiasAudit audit;
  const auto labels = label_space_of(data.examples);
  if (labels.size() < 2) {
    audit.separator_found = true;
    audit.degenerate_labels = true;
    if (!labels.empty()) audit.label = labels.front();
    return audit;
  }
  std::set<std::string> symbols;
  for (const auto& ex : data.examples) {
    symbols.insert(ex.hypothesis.begin(), ex.hypothesis.end());
  }
  for (const auto& sym : symbols) {
    for (const auto& label : labels) {
      const bool separates = std::all_of(
          data.examples.begin(), data.examples.end(), [&](const Example& ex) {
            const bool present = std::find(ex.hypothesis.begin(),
                                           ex.hypothesis.end(),
                                           sym) != ex.hypothesis.end();
            return present == (ex.label == label);
          });
      if (separates) {
        audit.separator_found = true;
        audit.feature = sym;
        audit.label = label;
        return audit;
      }
    }
  }
  return audit;
}

BiasAudit audit_bias(std::span<const SynthExample> examples) {
  return audit_bias(to_dataset(examples, "synthetic"));
}

std::string apply_bias_rule(const BiasAudit& audit,
                            const std::vector<std::string>& hypothesis,
                            const std::vector<std::string>& label_space) {
  if (!audit.separator_found || audit.degenerate_labels) {
    throw UsageError("apply_bias_rule: audit found no presence rule");
  }
  if (label_space.size() != 2) {
    throw UsageError("apply_bias_rule: needs a binary label space");
  }
  const bool present = std::find(hypothesis.begin(), hypothesis.end(),
                                 audit.feature) != hypothesis.end();
  if (present) return audit.label;
  return label_space[0] == audit.label ? label_space[1] : label_space[0];
}

}  // namespace debias
