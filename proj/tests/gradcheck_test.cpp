#include <cmath>

#include <gtest/gtest.h>

#include "polywsd/errors.hpp"
#include "polywsd/gradcheck.hpp"

using namespace polywsd;

TEST(FiniteDiff, HalfSquaredNorm) {
  Tensor theta = Tensor::vector({3, -1});
  auto f = [&](Tape& t) {
    Var v = t.leaf(theta);
    return scale(t, sum(t, mul(t, v, v)), 0.5);
  };
  const GradCheckReport r = finite_diff_check(f, theta, 1e-5);
  EXPECT_LT(r.max_rel_error, 1e-7);
  EXPECT_EQ(r.coordinates, 2u);
  EXPECT_NEAR(theta.grad()[0], 3.0, 1e-12);
  EXPECT_NEAR(theta.grad()[1], -1.0, 1e-12);
}

TEST(FiniteDiff, ConstantFunctionHasZeroError) {
  Tensor theta = Tensor::vector({1, 2});
  Tensor c = Tensor::scalar(7.0);
  auto f = [&](Tape& t) {
    t.leaf(theta);
    return sum(t, t.input(c));
  };
  const GradCheckReport r = finite_diff_check(f, theta, 1e-4);
  EXPECT_EQ(r.max_rel_error, 0.0);
}

TEST(FiniteDiff, NonPositiveStepIsContractError) {
  Tensor theta = Tensor::vector({1});
  auto f = [&](Tape& t) { return sum(t, t.leaf(theta)); };
  EXPECT_THROW(finite_diff_check(f, theta, 0.0), ContractError);
}

TEST(FiniteDiff, NonDeterministicFunctionIsOracleError) {
  Tensor theta = Tensor::vector({1});
  int calls = 0;
  auto f = [&](Tape& t) {
    Var v = t.leaf(theta);
    return scale(t, sum(t, v), 1.0 + 1e-3 * ++calls);
  };
  EXPECT_THROW(finite_diff_check(f, theta, 1e-4), OracleError);
}

TEST(FiniteDiff, DetectsAWrongGradient) {
  Tensor theta = Tensor::vector({0.5, -0.25});
  // Value is sum(x), backward claims 3 per coordinate.
  auto f = [&](Tape& t) {
    Var x = t.leaf(theta);
    double s = 0;
    for (double v : t.value(x).data()) s += v;
    return t.record(Tensor::scalar(s), {x}, [x](Tape& tape, Var self) {
      auto g = tape.grad_slot(x);
      for (double& v : g) v += 3.0 * tape.out_grad(self)[0];
    });
  };
  EXPECT_GT(finite_diff_check(f, theta, 1e-4).max_rel_error, 0.5);
}
