#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "polywsd/encoder.hpp"

namespace polywsd {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second moment estimates per parameter tensor, in parameter order.
struct AdamState {
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

// One bias-corrected Adam step using each tensor's grad slot. The state is
// sized on first use; a later size mismatch is a DimensionError.
void adam_update(std::span<const NamedParam> params, AdamState& state, const AdamConfig& config);

// Rescales all grads so their global L2 norm is at most max_norm. Returns the
// norm before clipping.
double clip_grad_norm(std::span<const NamedParam> params, double max_norm);

}  // namespace polywsd
