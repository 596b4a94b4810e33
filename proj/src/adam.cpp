#include "polywsd/adam.hpp"

#include <cmath>

#include "polywsd/errors.hpp"

namespace polywsd {

void adam_update(std::span<const NamedParam> params, AdamState& state, const AdamConfig& config) {
  if (state.first_moment.empty() && state.step == 0) {
    for (const NamedParam& p : params) {
      state.first_moment.emplace_back(p.tensor->size(), 0.0);
      state.second_moment.emplace_back(p.tensor->size(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
    throw DimensionError("adam: state holds " + std::to_string(state.first_moment.size()) + " tensors, got " +
                         std::to_string(params.size()) + " parameters");
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);

  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k].tensor;
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    if (m.size() != p.size() || v.size() != p.size()) {
      throw DimensionError("adam: moment size mismatch for " + params[k].name);
    }
    auto data = p.mutable_data();
    auto grad = p.mutable_grad();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double g = grad[i];
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      data[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

double clip_grad_norm(std::span<const NamedParam> params, double max_norm) {
  double sq = 0.0;
  for (const NamedParam& p : params)
    for (double g : p.tensor->grad()) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (const NamedParam& p : params)
      for (double& g : p.tensor->mutable_grad()) g *= factor;
  }
  return norm;
}

}  // namespace polywsd
