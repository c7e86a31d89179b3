#pragma once

#include <span>

#include "fvl/diff/matrix.hpp"
#include "fvl/diff/tape.hpp"

namespace fvl::diff {

// a [m x k] . b [k x n] -> [m x n]
DiffArray matmul(DiffArray a, DiffArray b);

// Fused affine map over a batch of rows: x [B x in] . w^T + bias, with
// w [out x in] and bias [1 x out]. Same result as matmul against a transposed
// weight followed by a row-broadcast add, under one backward rule.
DiffArray linear(DiffArray x, DiffArray weight, DiffArray bias);

// Binary ops accept equal shapes or a 1 x 1 operand on either side.
DiffArray add(DiffArray a, DiffArray b);
DiffArray sub(DiffArray a, DiffArray b);
DiffArray mul(DiffArray a, DiffArray b);

DiffArray scale(DiffArray a, double factor);
DiffArray average(DiffArray a, DiffArray b);

DiffArray sigmoid(DiffArray a);
DiffArray tanh(DiffArray a);
// relu'(0) = 0.
DiffArray relu(DiffArray a);

// [B x p], [B x q] -> [B x (p + q)]
DiffArray concat_cols(DiffArray a, DiffArray b);

DiffArray sum(DiffArray a);
DiffArray mean(DiffArray a);
// sum((pred - target)^2) against a constant target of the same shape.
DiffArray sum_squared_error(DiffArray pred, const Matrix& target);

enum class Elementwise { add, mul, sigmoid, tanh, relu };

// Tag dispatch over the pointwise primitives. Unary tags take one argument,
// binary tags two.
DiffArray elementwise(Elementwise op, std::span<const DiffArray> args);

}  // namespace fvl::diff
