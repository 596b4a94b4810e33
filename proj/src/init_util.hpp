#pragma once

#include <cmath>
#include <random>

#include "polywsd/tensor.hpp"

namespace polywsd::detail {

// Uniform in +-sqrt(6 / (fan_in + fan_out)).
inline Tensor glorot(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(Shape{fan_in, fan_out});
  for (double& v : t.mutable_data()) v = dist(rng);
  return t;
}

inline Tensor uniform(Shape shape, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(std::move(shape));
  for (double& v : t.mutable_data()) v = dist(rng);
  return t;
}

}  // namespace polywsd::detail
