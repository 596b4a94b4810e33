#include <cmath>

#include <gtest/gtest.h>

#include "polywsd/adam.hpp"
#include "polywsd/errors.hpp"

using namespace polywsd;

TEST(Adam, ZeroGradientsLeaveParamsUnchanged) {
  Tensor w = Tensor::vector({1.5, -2.0});
  w.set_requires_grad(true);
  const NamedParam p[] = {{"w", &w}};
  AdamState s;
  for (int i = 0; i < 3; ++i) adam_update(p, s, {});
  EXPECT_EQ(w[0], 1.5);
  EXPECT_EQ(w[1], -2.0);
  EXPECT_EQ(s.step, 3u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Tensor w = Tensor::scalar(0.0);
  w.set_requires_grad(true);
  w.mutable_grad()[0] = 1.0;
  const NamedParam p[] = {{"w", &w}};
  AdamState s;
  adam_update(p, s, {0.1, 0.9, 0.999, 1e-8});
  // Bias-corrected moments are both 1, so the step is lr / (1 + eps).
  EXPECT_NEAR(w.item(), -0.1 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, StateSizeMismatchIsDimensionError) {
  Tensor a = Tensor::vector({1}), b = Tensor::vector({1, 2});
  const NamedParam one[] = {{"a", &a}};
  const NamedParam two[] = {{"a", &a}, {"b", &b}};
  AdamState s;
  adam_update(one, s, {});
  EXPECT_THROW(adam_update(two, s, {}), DimensionError);
}

TEST(Adam, Deterministic) {
  auto run = [] {
    Tensor w = Tensor::vector({0.3, -0.7, 1.1});
    const NamedParam p[] = {{"w", &w}};
    AdamState s;
    for (int i = 0; i < 10; ++i) {
      auto g = w.mutable_grad();
      for (std::size_t k = 0; k < 3; ++k) g[k] = std::sin(w[k] * (i + 1));
      adam_update(p, s, {});
    }
    return std::vector<double>(w.data().begin(), w.data().end());
  };
  EXPECT_EQ(run(), run());
}

TEST(ClipGradNorm, ScalesOnlyAboveThreshold) {
  Tensor w = Tensor::vector({0, 0});
  auto g = w.mutable_grad();
  g[0] = 3;
  g[1] = 4;
  const NamedParam p[] = {{"w", &w}};
  EXPECT_DOUBLE_EQ(clip_grad_norm(p, 10.0), 5.0);
  EXPECT_EQ(w.grad()[0], 3.0);
  EXPECT_DOUBLE_EQ(clip_grad_norm(p, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(w.grad()[0], 0.6);
  EXPECT_DOUBLE_EQ(w.grad()[1], 0.8);
}
