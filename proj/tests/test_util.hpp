#pragma once

#include <cstdint>
#include <cstring>
#include <numeric>
#include <random>
#include <vector>

#include "debias/data_io.hpp"
#include "debias/model.hpp"
#include "debias/synthetic.hpp"
#include "debias/training.hpp"

namespace testutil {

using namespace debias;

// Vocabulary over every synthetic symbol: <pad> <unk> a b c.
inline Vocabulary synth_vocab() {
  return build_vocab(to_dataset(gen_dataset_B(4, 0), "B"));
}

inline std::vector<std::string> synth_labels() { return {kFalseLabel, kTrueLabel}; }

inline std::vector<IndexedExample> synth_rows(SynthVariant v, std::size_t n,
                                              std::uint64_t seed) {
  const Dataset d = to_dataset(gen_dataset(v, n, seed), v == SynthVariant::kA ? "A" : "B");
  return index_dataset(d, synth_vocab(), synth_labels()).examples;
}

inline ModelParams synth_model(std::uint64_t seed,
                               InitScheme init = InitScheme::kFramework) {
  return init_params(ModelSpec::synthetic(synth_labels()), synth_vocab().size(), seed, init);
}

struct Instance {
  TrainConfig cfg;
  ModelParams m;
  std::vector<IndexedExample> batch;
  std::vector<PremiseSwap> swaps;
};

// Random small problem: fresh parameters, a batch of synthetic B rows with
// longer random hypotheses mixed in, alpha/beta drawn per call.
inline Instance random_instance(Method method, Routing routing, std::uint64_t seed,
                                std::size_t batch = 8,
                                ModelSpec spec = ModelSpec::synthetic(synth_labels())) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> wide(0.1, 3.0), frac(0.25, 0.75);
  Instance in;
  in.cfg.method = method;
  in.cfg.routing = routing;
  in.cfg.alpha = method == Method::kMethod2 ? frac(rng) : wide(rng);
  in.cfg.beta = wide(rng);
  in.m = init_params(spec, synth_vocab().size(), rng());
  std::uniform_int_distribution<int> tok(2, 4), len(1, 3), lab(0, 1);
  for (std::size_t i = 0; i < batch; ++i) {
    IndexedExample ex;
    for (int k = len(rng); k > 0; --k) ex.premise.push_back(tok(rng));
    for (int k = len(rng); k > 0; --k) ex.hypothesis.push_back(tok(rng));
    ex.label = lab(rng);
    in.batch.push_back(ex);
  }
  if (method == Method::kMethod2) {
    std::vector<std::size_t> ids(batch);
    std::iota(ids.begin(), ids.end(), 0);
    in.swaps = resolve_swaps(select_swaps(ids, batch, in.cfg.alpha, 1, rng), ids, in.batch);
  }
  return in;
}

inline bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

inline bool same_bits(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_bits(a[i], b[i])) return false;
  }
  return true;
}

inline bool same_bits(const Gradients& a, const Gradients& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [id, t] : a) {
    auto it = b.find(id);
    if (it == b.end() || !same_bits(t, it->second)) return false;
  }
  return true;
}

}  // namespace testutil
