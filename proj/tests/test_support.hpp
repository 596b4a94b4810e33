#pragma once

#include <bit>
#include <cstdint>
#include <random>
#include <vector>

#include "polywsd/bcl.hpp"
#include "polywsd/model.hpp"
#include "polywsd/synthetic.hpp"
#include "polywsd/tensor.hpp"

namespace polywsd::testing {

inline Tensor random_tensor(Shape shape, std::mt19937_64& rng, double bound = 1.0) {
  std::uniform_real_distribution<double> u(-bound, bound);
  std::vector<double> v(shape.numel());
  for (double& x : v) x = u(rng);
  return Tensor(std::move(shape), std::move(v));
}

// d_model 8, one layer, 2 heads, poly_m 2.
inline ModelConfig small_config(std::size_t vocab_size = 50, std::size_t poly_m = 2) {
  ModelConfig c;
  c.context = {vocab_size, 8, 1, 2, 16, 16};
  c.gloss = c.context;
  c.fusion = {poly_m, 2, 8};
  return c;
}

inline SyntheticData small_data(std::size_t instances = 12, std::uint64_t seed = 3) {
  SyntheticSpec spec;
  spec.lemmas = 4;
  spec.senses_per_lemma = 3;
  spec.instances = instances;
  spec.context_words = 6;
  spec.filler_words = 8;
  spec.seed = seed;
  return make_synthetic(spec);
}

inline std::vector<const CorpusInstance*> pointers(const Corpus& corpus, std::size_t first, std::size_t count) {
  std::vector<const CorpusInstance*> out;
  for (std::size_t i = first; i < first + count; ++i) out.push_back(&corpus.at(i));
  return out;
}

inline bool same_bits(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

}  // namespace polywsd::testing
