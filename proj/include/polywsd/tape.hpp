#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "polywsd/tensor.hpp"

namespace polywsd {

// Handle to a value recorded on a Tape. Only meaningful for the tape that
// produced it.
struct Var {
  std::size_t id = 0;
};

// Records executed ops in order so that backward() can replay them in reverse
// and accumulate gradients. One tape per forward pass; not thread-safe.
class Tape {
 public:
  // Backward rule for one recorded op. Reads the op's output gradient via
  // out_grad(self) and adds its contribution into each input's grad_slot().
  using BackwardFn = std::function<void(Tape& tape, Var self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Parameter read by reference. backward() adds the gradient into
  // param.mutable_grad() when param.requires_grad(). Repeated
  // calls with the same tensor return the same Var.
  Var leaf(const Tensor& param);
  // Read-only reference (no copy, no gradient sink).
  Var input(const Tensor& value);
  Var constant(Tensor value);

  Var record(Tensor value, std::vector<Var> inputs, BackwardFn backward);

  // References stay valid for the tape's lifetime.
  const Tensor& value(Var v) const;
  const Shape& shape(Var v) const { return value(v).shape(); }
  std::span<const double> grad(Var v) const;

  std::span<const double> out_grad(Var self) const { return grad(self); }
  std::span<double> grad_slot(Var v);
  bool needs_grad(Var v) const { return nodes_.at(v.id).needs_grad; }

  // Reverse sweep from a scalar loss. Throws ContractError for non-scalar loss
  // or a Var from another tape.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor owned;
    const Tensor* ref = nullptr;
    const Tensor* param = nullptr;
    std::vector<Var> inputs;
    BackwardFn backward;
    std::vector<double> grad;
    bool needs_grad = false;
  };

  const Node& node(Var v) const;

  std::deque<Node> nodes_;  // deque: recording never moves existing nodes
  std::unordered_map<const Tensor*, std::size_t> referenced_;
};

// Differentiable ops. Shapes are checked and mismatches raise DimensionError
// naming both operands.
Var matmul(Tape& tape, Var a, Var b);
Var transpose(Tape& tape, Var a);
Var add(Tape& tape, Var a, Var b);
Var mul(Tape& tape, Var a, Var b);
Var scale(Tape& tape, Var a, double factor);
// m[r x c] + v[c] broadcast over rows.
Var add_row(Tape& tape, Var m, Var v);
Var row_softmax(Tape& tape, Var m);
Var layer_norm(Tape& tape, Var x, Var gain, Var bias, double eps = 1e-5);
Var gelu(Tape& tape, Var x);
Var gather_rows(Tape& tape, Var table, std::span<const std::size_t> ids);
// Rows [start, start + count) of a matrix.
Var slice_rows(Tape& tape, Var m, std::size_t start, std::size_t count);
// Row i of a matrix as a rank-1 tensor.
Var row(Tape& tape, Var m, std::size_t i);
// Rank-1 v stacked n times into an [n x len(v)] matrix.
Var replicate_rows(Tape& tape, Var v, std::size_t n);
Var concat_cols(Tape& tape, std::span<const Var> parts);
Var concat_rows(Tape& tape, std::span<const Var> parts);
Var reshape(Tape& tape, Var a, Shape shape);
Var sum(Tape& tape, Var a);
Var mean(Tape& tape, Var a);
// Per-row negative log-softmax at targets[i] -> rank-1 [rows]. Entries with
// excluded[i * cols + j] set are dropped from the row's normalizer; excluding
// a row's own target is a ContractError. Computed as a fused log-softmax.
Var cross_entropy_rows(Tape& tape, Var logits, std::span<const std::size_t> targets,
                       const std::vector<bool>& excluded = {});

// Non-differentiable counterparts used for reporting and as test oracles.
Tensor softmax_rows(const Tensor& m, const std::vector<bool>& excluded = {});
Tensor matmul(const Tensor& a, const Tensor& b);

}  // namespace polywsd
