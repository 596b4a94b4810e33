#pragma once

#include "polywsd/tape.hpp"

namespace polywsd {

// softmax(q k^T / sqrt(d_k)) -> [rows(q) x rows(k)]; each row sums to 1.
Var attention_weights(Tape& tape, Var q, Var k);

// attention_weights(q, k) * v.
Var scaled_dot_attention(Tape& tape, Var q, Var k, Var v);

}  // namespace polywsd
