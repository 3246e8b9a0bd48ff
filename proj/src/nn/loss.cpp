#include "markovnet/nn/loss.hpp"

#include <cmath>

#include "markovnet/errors.hpp"

namespace markovnet::nn {

Matrix softmax(const Matrix& logits) {
    Matrix shifted = logits.rowwise() - logits.colwise().maxCoeff();
    Matrix e = shifted.array().exp().matrix();
    Eigen::RowVectorXd sums = e.colwise().sum();
    return e.array().rowwise() / sums.array();
}

LossValue cce_loss(const Matrix& probs, const Matrix& onehot) {
    if (probs.rows() != onehot.rows() || probs.cols() != onehot.cols()) {
        throw ShapeError("cce_loss: probs/onehot shape mismatch");
    }
    LossValue out;
    out.value = -(onehot.array() * probs.array().max(1e-12).log()).sum();
    out.grad = probs - onehot;
    return out;
}

LossValue mse_loss(const Matrix& pred, const Matrix& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        throw ShapeError("mse_loss: pred/target shape mismatch");
    }
    LossValue out;
    const Matrix residual = pred - target;
    const double n = static_cast<double>(pred.cols());
    out.value = residual.squaredNorm() / n;
    out.grad = (2.0 / n) * residual;
    return out;
}

}  // namespace markovnet::nn
