#pragma once

#include "markovnet/nn/loss.hpp"
#include "markovnet/nn/model.hpp"

namespace markovnet::nn {

// Batch loss of the model on (xs, targets): cross-entropy expects a softmax
// head and onehot targets; squared error expects an identity head.
double batch_loss(const Model& model, const std::vector<Matrix>& xs, const Matrix& targets,
                  LossKind kind);

// Analytic whole-model gradient of batch_loss as a flat vector.
Vector batch_gradient(const Model& model, const std::vector<Matrix>& xs, const Matrix& targets,
                      LossKind kind, double* loss_out = nullptr);

// Central-finite-difference check of the analytic gradient on up to
// max_checks randomly chosen parameters (all parameters when the model is
// small enough). Returns max |g_a - g_n| / max(|g_a|, |g_n|, 1e-8).
double grad_check(const Model& model, const std::vector<Matrix>& xs, const Matrix& targets,
                  LossKind kind, double epsilon = 1e-5, std::size_t max_checks = 200,
                  std::uint64_t seed = 0);

}  // namespace markovnet::nn
