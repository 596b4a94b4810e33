#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "polywsd/tape.hpp"

namespace polywsd {

// Builds a scalar loss on the given tape. Must read parameters through
// tape.leaf() so perturbations are observed.
using LossBuilder = std::function<Var(Tape&)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::size_t worst_param = 0;  // index into the params span
  std::size_t worst_index = 0;  // flat coordinate within that tensor
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Compares reverse-mode gradients against central differences
// (f(x + h e_i) - f(x - h e_i)) / 2h over every coordinate of every tensor.
// Error per coordinate is |analytic - numeric| / max(1, |analytic|).
// Overwrites the grad slots of params. Throws OracleError if two evaluations
// at identical parameters disagree, ContractError if h <= 0.
GradCheckReport finite_diff_check(const LossBuilder& loss, std::span<Tensor* const> params, double h);

GradCheckReport finite_diff_check(const LossBuilder& loss, Tensor& params, double h);

}  // namespace polywsd
