#pragma once

#include "markovnet/nn/model.hpp"

namespace markovnet::nn {

struct AdamHyper {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    Vector m;  // first moment
    Vector v;  // second moment
    long step_count = 0;
    AdamHyper hyper;

    static AdamState create(Eigen::Index n, const AdamHyper& hyper = {});
};

// In-place Adam update with bias correction. Throws on non-finite gradients.
void adam_step(Vector& params, const Vector& grads, AdamState& state);

}  // namespace markovnet::nn
