#include "markovnet/nn/adam.hpp"

#include <cmath>

#include "markovnet/errors.hpp"

namespace markovnet::nn {

AdamState AdamState::create(Eigen::Index n, const AdamHyper& hyper) {
    AdamState state;
    state.m = Vector::Zero(n);
    state.v = Vector::Zero(n);
    state.hyper = hyper;
    return state;
}

void adam_step(Vector& params, const Vector& grads, AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw ShapeError("adam_step: size mismatch");
    }
    if (!grads.allFinite()) throw Error("adam_step: non-finite gradient");

    const auto& h = state.hyper;
    ++state.step_count;
    state.m = h.beta1 * state.m + (1.0 - h.beta1) * grads;
    state.v = h.beta2 * state.v + (1.0 - h.beta2) * grads.cwiseProduct(grads);
    const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step_count));
    const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step_count));
    params.array() -=
        h.lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + h.eps);
}

}  // namespace markovnet::nn
