#pragma once

#include "markovnet/nn/model.hpp"

namespace markovnet::nn {

enum class LossKind { CrossEntropy, SquaredError };

// Scalar loss plus the gradient the backward pass consumes: for
// CrossEntropy the gradient is w.r.t. the pre-softmax logits
// (probs - onehot); for SquaredError it is w.r.t. the predictions.
struct LossValue {
    double value = 0.0;
    Matrix grad;
};

// Column-per-sample layout. Softmax over each column.
Matrix softmax(const Matrix& logits);

// Categorical cross-entropy summed over the batch (no 1/N), probabilities
// clamped at 1e-12 before the log. onehot columns must be unit basis vectors.
LossValue cce_loss(const Matrix& probs, const Matrix& onehot);

// Mean over samples (columns) of the squared Euclidean residual norm.
LossValue mse_loss(const Matrix& pred, const Matrix& target);

}  // namespace markovnet::nn
