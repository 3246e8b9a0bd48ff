#include "markovnet/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "markovnet/errors.hpp"

namespace markovnet::nn {

namespace {

LossValue eval_loss(const Matrix& out, const Matrix& targets, LossKind kind) {
    switch (kind) {
        case LossKind::CrossEntropy: return cce_loss(out, targets);
        case LossKind::SquaredError: return mse_loss(out, targets);
    }
    throw ShapeError("unknown loss kind");
}

}  // namespace

double batch_loss(const Model& model, const std::vector<Matrix>& xs, const Matrix& targets,
                  LossKind kind) {
    ForwardCache cache;
    const Matrix out = forward_model(model, xs, cache);
    return eval_loss(out, targets, kind).value;
}

Vector batch_gradient(const Model& model, const std::vector<Matrix>& xs, const Matrix& targets,
                      LossKind kind, double* loss_out) {
    ForwardCache cache;
    const Matrix out = forward_model(model, xs, cache);
    const LossValue loss = eval_loss(out, targets, kind);
    if (loss_out) *loss_out = loss.value;

    if (kind == LossKind::CrossEntropy && model.dense.back().act != Activation::Softmax) {
        throw ShapeError("cross-entropy requires a softmax output layer");
    }
    if (kind == LossKind::SquaredError && model.dense.back().act != Activation::Identity) {
        throw ShapeError("squared error requires an identity output layer");
    }
    // For softmax + CCE the pre-activation gradient is probs - onehot; for an
    // identity head it is the MSE gradient itself.
    Gradients grads = zeros_like(model.shape);
    backward_model(model, xs, cache, loss.grad, grads);
    return flatten(grads);
}

double grad_check(const Model& model, const std::vector<Matrix>& xs, const Matrix& targets,
                  LossKind kind, double epsilon, std::size_t max_checks, std::uint64_t seed) {
    if (epsilon < 1e-7 || epsilon > 1e-4) {
        throw ParameterError("grad_check epsilon outside [1e-7, 1e-4]");
    }
    const Vector analytic = batch_gradient(model, xs, targets, kind);
    const Vector theta = flatten(model);
    const auto n = static_cast<std::size_t>(theta.size());

    std::vector<std::size_t> indices(n);
    std::iota(indices.begin(), indices.end(), 0);
    if (n > max_checks) {
        Rng rng(seed);
        for (std::size_t i = 0; i < max_checks; ++i) {
            const auto j = i + rng.below(n - i);
            std::swap(indices[i], indices[j]);
        }
        indices.resize(max_checks);
    }

    Model probe = zeros_like(model.shape);
    Vector work = theta;
    double max_rel = 0.0;
    for (const std::size_t idx : indices) {
        const auto i = static_cast<Eigen::Index>(idx);
        const double saved = work(i);
        work(i) = saved + epsilon;
        unflatten(work, probe);
        const double lp = batch_loss(probe, xs, targets, kind);
        work(i) = saved - epsilon;
        unflatten(work, probe);
        const double lm = batch_loss(probe, xs, targets, kind);
        work(i) = saved;

        const double numeric = (lp - lm) / (2.0 * epsilon);
        const double denom = std::max({std::abs(analytic(i)), std::abs(numeric), 1e-8});
        max_rel = std::max(max_rel, std::abs(analytic(i) - numeric) / denom);
    }
    return max_rel;
}

}  // namespace markovnet::nn
