#include "polywsd/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polywsd/errors.hpp"

namespace polywsd {

Shape::Shape(std::initializer_list<std::size_t> dims) : Shape(std::vector<std::size_t>(dims)) {}

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.size() > kMaxRank) {
    throw DimensionError("tensor rank " + std::to_string(dims_.size()) + " exceeds 3");
  }
  for (std::size_t d : dims_) {
    if (d == 0) throw DimensionError("zero-sized dimension in shape " + str());
  }
}

std::size_t Shape::numel() const {
  std::size_t n = 1;
  for (std::size_t d : dims_) n *= d;
  return n;
}

std::string Shape::str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i) os << 'x';
    os << dims_[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_.numel(), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_.numel()) {
    throw DimensionError("data length " + std::to_string(data_.size()) + " does not match shape " +
                         shape_.str());
  }
}

Tensor Tensor::vector(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor(Shape{n}, std::move(v));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
  return Tensor(Shape{rows, cols}, std::move(v));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t(Shape{n, n});
  for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
  return t;
}

std::size_t Tensor::rows() const {
  if (shape_.rank() != 2) throw DimensionError("rows() on non-matrix of shape " + shape_.str());
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (shape_.rank() != 2) throw DimensionError("cols() on non-matrix of shape " + shape_.str());
  return shape_[1];
}

double Tensor::item() const {
  if (data_.size() != 1) throw DimensionError("item() on tensor of shape " + shape_.str());
  return data_[0];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  if (r >= rows() || c >= cols()) {
    throw IndexError("index (" + std::to_string(r) + "," + std::to_string(c) + ") out of range for " +
                     shape_.str());
  }
  return data_[r * cols() + c];
}

void Tensor::set_requires_grad(bool on) {
  requires_grad_ = on;
  if (on && grad_.empty()) grad_.assign(data_.size(), 0.0);
  if (!on) grad_.clear();
}

std::span<double> Tensor::mutable_grad() const {
  if (grad_.empty()) grad_.assign(data_.size(), 0.0);
  return grad_;
}

void Tensor::zero_grad() { std::fill(grad_.begin(), grad_.end(), 0.0); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace polywsd
