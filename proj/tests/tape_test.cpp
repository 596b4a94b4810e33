#include <functional>
#include <ostream>
#include <memory>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "polywsd/errors.hpp"
#include "polywsd/gradcheck.hpp"
#include "polywsd/tape.hpp"
#include "test_support.hpp"

using namespace polywsd;
using polywsd::testing::random_tensor;

TEST(Backward, SumGivesOnes) {
  Tensor x = Tensor::vector({1, 2, 3});
  x.set_requires_grad(true);
  Tape tape;
  tape.backward(sum(tape, tape.leaf(x)));
  EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()), (std::vector<double>{1, 1, 1}));
}

TEST(Backward, SumOfSquaresGivesTwoX) {
  Tensor x = Tensor::vector({1, 2});
  x.set_requires_grad(true);
  Tape tape;
  Var v = tape.leaf(x);
  tape.backward(sum(tape, mul(tape, v, v)));
  EXPECT_EQ(x.grad()[0], 2.0);
  EXPECT_EQ(x.grad()[1], 4.0);
}

TEST(Backward, TensorUsedTwiceAccumulates) {
  Tensor x = Tensor::vector({1, 2, 3});
  x.set_requires_grad(true);
  Tape tape;
  tape.backward(add(tape, sum(tape, tape.leaf(x)), sum(tape, tape.leaf(x))));
  for (double g : x.grad()) EXPECT_EQ(g, 2.0);
}

TEST(Backward, NonScalarLossIsContractError) {
  Tensor x = Tensor::vector({1, 2});
  x.set_requires_grad(true);
  Tape tape;
  EXPECT_THROW(tape.backward(tape.leaf(x)), ContractError);
}

TEST(Backward, InputsAndFrozenTensorsGetNoGradient) {
  Tensor x = Tensor::vector({1, 2});
  Tensor frozen = Tensor::vector({3, 4});
  x.set_requires_grad(true);
  Tape tape;
  tape.backward(sum(tape, mul(tape, tape.leaf(x), tape.leaf(frozen))));
  EXPECT_FALSE(frozen.has_grad());
  EXPECT_EQ(x.grad()[0], 3.0);
  EXPECT_EQ(x.grad()[1], 4.0);
}

TEST(Backward, ReplayGivesBitIdenticalGradients) {
  std::mt19937_64 rng(5);
  Tensor a = random_tensor(Shape{3, 4}, rng);
  Tensor b = random_tensor(Shape{4, 2}, rng);
  a.set_requires_grad(true);
  auto run = [&] {
    a.zero_grad();
    Tape tape;
    Var y = row_softmax(tape, matmul(tape, tape.leaf(a), tape.input(b)));
    tape.backward(sum(tape, mul(tape, y, y)));
    return std::vector<double>(a.grad().begin(), a.grad().end());
  };
  const auto g1 = run();
  const auto g2 = run();
  for (std::size_t i = 0; i < g1.size(); ++i) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(g1[i]), std::bit_cast<std::uint64_t>(g2[i]));
  }
}

TEST(Ops, ShapeErrors) {
  Tape tape;
  Tensor a(Shape{2, 3}), b(Shape{2, 3});
  EXPECT_THROW(matmul(tape, tape.input(a), tape.input(b)), DimensionError);
  Tensor c(Shape{3, 2});
  EXPECT_THROW(add(tape, tape.input(a), tape.input(c)), DimensionError);
  EXPECT_THROW(row(tape, tape.input(a), 2), IndexError);
}

TEST(Ops, MatmulAssociativity) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor a = random_tensor(Shape{3, 3}, rng), b = random_tensor(Shape{3, 3}, rng),
                 c = random_tensor(Shape{3, 3}, rng);
    const Tensor l = matmul(matmul(a, b), c), r = matmul(a, matmul(b, c));
    for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(l[i], r[i], 1e-9);
  }
}

TEST(Ops, SoftmaxRowsSumToOne) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor m = random_tensor(Shape{4, 5}, rng, 30.0);
    const Tensor p = softmax_rows(m);
    for (std::size_t r = 0; r < 4; ++r) {
      double s = 0;
      for (std::size_t c = 0; c < 5; ++c) s += p.at(r, c);
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
  }
}

TEST(Ops, SoftmaxMaskZeroesEntries) {
  const Tensor p = softmax_rows(Tensor::matrix(2, 2, {0, 0, 0, 0}), {false, true, false, false});
  EXPECT_EQ(p.at(0, 0), 1.0);
  EXPECT_EQ(p.at(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(p.at(1, 0), 0.5);
}

TEST(Ops, ConcatAndReplicateValues) {
  Tape tape;
  Tensor a = Tensor::matrix(2, 1, {1, 2}), b = Tensor::matrix(2, 1, {3, 4});
  const Var parts[] = {tape.input(a), tape.input(b)};
  const Tensor& c = tape.value(concat_cols(tape, parts));
  EXPECT_EQ(std::vector<double>(c.data().begin(), c.data().end()), (std::vector<double>{1, 3, 2, 4}));
  Tensor r = Tensor::vector({1, 2});
  const Tensor& rep = tape.value(replicate_rows(tape, tape.input(r), 3));
  EXPECT_EQ(rep.shape(), (Shape{3, 2}));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(rep.at(i, 0), 1.0);
    EXPECT_EQ(rep.at(i, 1), 2.0);
  }
}

TEST(Ops, CrossEntropyMatchesLogSoftmax) {
  Tape tape;
  Tensor logits = Tensor::matrix(2, 3, {1, 2, 3, 0, 0, 0});
  const std::size_t targets[] = {2, 0};
  const Tensor& nll = tape.value(cross_entropy_rows(tape, tape.input(logits), targets));
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  EXPECT_NEAR(nll[0], -(3.0 - std::log(z)), 1e-12);
  EXPECT_NEAR(nll[1], std::log(3.0), 1e-12);
}

TEST(Ops, CrossEntropyOnExcludedTargetIsContractError) {
  Tape tape;
  Tensor logits = Tensor::matrix(1, 2, {1, 2});
  const std::size_t targets[] = {0};
  EXPECT_THROW(cross_entropy_rows(tape, tape.input(logits), targets, {true, false}), ContractError);
}

// Every differentiable op: a random projection of its output passes the
// finite-difference check.
namespace {

struct OpCase {
  const char* name;
  Shape in;
  std::function<Var(Tape&, Var)> op;
};

void PrintTo(const OpCase& c, std::ostream* os) { *os << c.name; }

}  // namespace

class OpGradient : public ::testing::TestWithParam<OpCase> {};

TEST_P(OpGradient, RandomProjectionMatchesCentralDifference) {
  const OpCase& c = GetParam();
  std::mt19937_64 rng(21);
  Tensor x = random_tensor(c.in, rng);
  Tensor probe;
  bool probe_ready = false;
  auto loss = [&](Tape& tape) {
    Var y = c.op(tape, tape.leaf(x));
    if (!probe_ready) {
      probe = random_tensor(tape.shape(y), rng);
      probe_ready = true;
    }
    return sum(tape, mul(tape, y, tape.input(probe)));
  };
  const GradCheckReport r = finite_diff_check(loss, x, 1e-4);
  EXPECT_LT(r.max_rel_error, 1e-4) << c.name;
}

namespace {

Tensor& fixed(Shape s, std::uint64_t seed) {
  static std::vector<std::unique_ptr<Tensor>> keep;
  std::mt19937_64 rng(seed);
  keep.push_back(std::make_unique<Tensor>(random_tensor(std::move(s), rng)));
  return *keep.back();
}

const std::size_t kIds[] = {2, 0, 2, 1};
const std::size_t kTargets[] = {1, 0, 2};

}  // namespace

INSTANTIATE_TEST_SUITE_P(
    AllOps, OpGradient,
    ::testing::Values(
        OpCase{"matmul_left", Shape{3, 4}, [](Tape& t, Var x) { return matmul(t, x, t.input(fixed({4, 2}, 1))); }},
        OpCase{"matmul_right", Shape{4, 2}, [](Tape& t, Var x) { return matmul(t, t.input(fixed({3, 4}, 2)), x); }},
        OpCase{"transpose", Shape{2, 3}, [](Tape& t, Var x) { return transpose(t, x); }},
        OpCase{"add", Shape{2, 3}, [](Tape& t, Var x) { return add(t, x, x); }},
        OpCase{"mul", Shape{2, 3}, [](Tape& t, Var x) { return mul(t, x, t.input(fixed({2, 3}, 3))); }},
        OpCase{"scale", Shape{2, 3}, [](Tape& t, Var x) { return scale(t, x, -1.5); }},
        OpCase{"add_row", Shape{3}, [](Tape& t, Var x) { return add_row(t, t.input(fixed({2, 3}, 4)), x); }},
        OpCase{"row_softmax", Shape{3, 4}, [](Tape& t, Var x) { return row_softmax(t, x); }},
        OpCase{"layer_norm", Shape{3, 4},
               [](Tape& t, Var x) { return layer_norm(t, x, t.input(fixed({4}, 5)), t.input(fixed({4}, 6))); }},
        OpCase{"layer_norm_gain", Shape{4},
               [](Tape& t, Var g) { return layer_norm(t, t.input(fixed({3, 4}, 7)), g, t.input(fixed({4}, 8))); }},
        OpCase{"gelu", Shape{3, 4}, [](Tape& t, Var x) { return gelu(t, x); }},
        OpCase{"gather_rows", Shape{3, 2}, [](Tape& t, Var x) { return gather_rows(t, x, kIds); }},
        OpCase{"slice_rows", Shape{4, 2}, [](Tape& t, Var x) { return slice_rows(t, x, 1, 2); }},
        OpCase{"row", Shape{3, 2}, [](Tape& t, Var x) { return row(t, x, 1); }},
        OpCase{"replicate_rows", Shape{3}, [](Tape& t, Var x) { return replicate_rows(t, x, 4); }},
        OpCase{"concat_cols", Shape{2, 2},
               [](Tape& t, Var x) {
                 const Var p[] = {x, t.input(fixed({2, 3}, 9)), x};
                 return concat_cols(t, p);
               }},
        OpCase{"concat_rows", Shape{2, 2},
               [](Tape& t, Var x) {
                 const Var p[] = {t.input(fixed({1, 2}, 10)), x};
                 return concat_rows(t, p);
               }},
        OpCase{"reshape", Shape{2, 3}, [](Tape& t, Var x) { return reshape(t, x, Shape{6}); }},
        OpCase{"mean", Shape{2, 3}, [](Tape& t, Var x) { return mean(t, x); }},
        OpCase{"cross_entropy", Shape{3, 3},
               [](Tape& t, Var x) { return cross_entropy_rows(t, x, kTargets); }},
        OpCase{"cross_entropy_masked", Shape{3, 3},
               [](Tape& t, Var x) {
                 return cross_entropy_rows(t, x, kTargets,
                                           {false, false, true, false, false, false, false, false, false});
               }}),
    [](const ::testing::TestParamInfo<OpCase>& info) { return std::string(info.param.name); });
