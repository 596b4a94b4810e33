#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "polywsd/errors.hpp"
#include "polywsd/tensor.hpp"

using namespace polywsd;

TEST(Shape, NumelAndRank) {
  EXPECT_EQ(Shape{}.numel(), 1u);
  EXPECT_EQ(Shape{}.rank(), 0u);
  EXPECT_EQ((Shape{2, 3, 4}).numel(), 24u);
  EXPECT_EQ((Shape{2, 3}).str(), "[2x3]");
}

TEST(Shape, RejectsRankAboveThreeAndZeroDims) {
  EXPECT_THROW((Shape{1, 2, 3, 4}), DimensionError);
  EXPECT_THROW((Shape{2, 0}), DimensionError);
}

TEST(Tensor, DataLengthMustMatchShape) {
  EXPECT_THROW(Tensor(Shape{2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
  const Tensor t = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(t.at(1, 2), 6.0);
  EXPECT_THROW(t.at(2, 0), IndexError);
}

TEST(Tensor, IdentityAndScalar) {
  const Tensor i = Tensor::identity(3);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(i.at(r, c), r == c ? 1.0 : 0.0);
  EXPECT_EQ(Tensor::scalar(4.5).item(), 4.5);
  EXPECT_THROW(Tensor::vector({1, 2}).item(), DimensionError);
  EXPECT_THROW(Tensor::vector({1, 2}).rows(), DimensionError);
}

TEST(Tensor, GradSlotFollowsRequiresGrad) {
  Tensor t = Tensor::vector({1, 2, 3});
  EXPECT_FALSE(t.has_grad());
  t.set_requires_grad(true);
  ASSERT_EQ(t.grad().size(), 3u);
  t.mutable_grad()[1] = 5.0;
  t.zero_grad();
  EXPECT_EQ(t.grad()[1], 0.0);
  t.set_requires_grad(false);
  EXPECT_FALSE(t.has_grad());
}

TEST(Tensor, AllFinite) {
  Tensor t = Tensor::vector({1, 2});
  EXPECT_TRUE(t.all_finite());
  t.mutable_data()[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(t.all_finite());
}
