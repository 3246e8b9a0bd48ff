#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "markovnet/rng.hpp"

namespace markovnet::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Cell { Gru, Lstm };
enum class Activation { ReLU, Softmax, Identity };

std::string to_string(Cell cell);
std::string to_string(Activation act);

// Gate parameters, hidden x input (W) and hidden x hidden (U).
struct GruParams {
    Matrix Wz, Wr, Wh;
    Matrix Uz, Ur, Uh;
    Vector bz, br, bh;
};

// Concatenated-input form: each gate matrix is hidden x (hidden + input) and
// acts on [h_{t-1}; x_t].
struct LstmParams {
    Matrix Wf, Wi, Wo, Wc;
    Vector bf, bi, bo, bc;
};

struct DenseParams {
    Matrix W;  // out x in
    Vector b;
    Activation act = Activation::Identity;
};

struct ModelShape {
    Cell cell = Cell::Gru;
    int input = 4;
    int hidden = 32;
    std::vector<std::pair<int, Activation>> dense;  // (width, activation) after the cell
};

ModelShape classifier_shape(Cell cell, int input);              // cell(32) -> 16 ReLU -> 3 softmax
ModelShape forecaster_shape(Cell cell, int input, int output);  // cell(64) -> 64 ReLU -> output

// One recurrent cell followed by dense layers. Also used as the gradient
// container (same shapes, same flatten order).
struct Model {
    ModelShape shape;
    GruParams gru;
    LstmParams lstm;  // unused matrices stay empty for the inactive cell
    std::vector<DenseParams> dense;
};

using Gradients = Model;

std::size_t param_count(const ModelShape& shape);

// Glorot-uniform weights (U[-sqrt(6/(fan_in+fan_out)), +...]), zero biases;
// matrices are filled in storage order so the draw sequence is fixed.
Model init_params(const ModelShape& shape, Rng& rng);

Model zeros_like(const ModelShape& shape);

// Exact bijection between the structured parameters and a flat vector.
Vector flatten(const Model& model);
void unflatten(const Vector& flat, Model& model);

// Per-batch activations kept for the backward pass. Batches are
// column-major: one column per sample.
struct ForwardCache {
    std::vector<Matrix> h;  // hidden states, h[0] = 0, size T+1
    std::vector<Matrix> z, r, g;                    // GRU gates
    std::vector<Matrix> f, i, o, cbar, c, tanh_c;   // LSTM gates; c[0] = 0
    std::vector<Matrix> dense_in, dense_pre;
    Matrix out;
};

// xs[t] is input x batch at step t; returns final-layer activations
// (softmax applied when the last layer is Softmax).
Matrix forward_model(const Model& model, const std::vector<Matrix>& xs, ForwardCache& cache);

// d_top is the loss gradient w.r.t. the last layer's pre-activation
// (probs - onehot for softmax + cross-entropy, the MSE gradient for an
// identity head). Gradients are accumulated into grads.
void backward_model(const Model& model, const std::vector<Matrix>& xs, const ForwardCache& cache,
                    const Matrix& d_top, Gradients& grads);

// Checkpoint format "markovnet-model v1": descriptor line, then one
// parameter per line.
std::string shape_descriptor(const ModelShape& shape);
ModelShape shape_from_descriptor(const std::string& descriptor);
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace markovnet::nn
