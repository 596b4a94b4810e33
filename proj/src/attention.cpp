#include "polywsd/attention.hpp"

#include <cmath>

#include "polywsd/errors.hpp"

namespace polywsd {

Var attention_weights(Tape& tape, Var q, Var k) {
  const Tensor& qv = tape.value(q);
  const Tensor& kv = tape.value(k);
  if (qv.shape().rank() != 2 || kv.shape().rank() != 2 || qv.cols() != kv.cols()) {
    throw DimensionError("attention: query " + qv.shape().str() + " and key " + kv.shape().str() +
                         " widths differ");
  }
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(qv.cols()));
  return row_softmax(tape, scale(tape, matmul(tape, q, transpose(tape, k)), inv_sqrt_dk));
}

Var scaled_dot_attention(Tape& tape, Var q, Var k, Var v) {
  if (tape.value(k).rows() != tape.value(v).rows()) {
    throw DimensionError("attention: key " + tape.value(k).shape().str() + " and value " +
                         tape.value(v).shape().str() + " row counts differ");
  }
  return matmul(tape, attention_weights(tape, q, k), v);
}

}  // namespace polywsd
