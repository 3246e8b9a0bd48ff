#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "markovnet/errors.hpp"
#include "markovnet/nn/adam.hpp"
#include "markovnet/nn/gradcheck.hpp"
#include "markovnet/nn/loss.hpp"
#include "markovnet/nn/model.hpp"

using namespace markovnet;
using namespace markovnet::nn;

namespace {

std::vector<Matrix> random_sequence(int steps, int width, int batch, Rng& rng) {
    std::vector<Matrix> xs(static_cast<std::size_t>(steps));
    for (auto& x : xs) {
        x.resize(width, batch);
        for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = rng.uniform(-1.0, 1.0);
    }
    return xs;
}

Matrix random_onehot(int classes, int batch, Rng& rng) {
    Matrix y = Matrix::Zero(classes, batch);
    for (int c = 0; c < batch; ++c) y(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(classes))), c) = 1.0;
    return y;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/markovnet_nn_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("classifier parameter count matches the arithmetic") {
    CHECK(param_count(classifier_shape(Cell::Gru, 4)) == 4131);
    // GRU block alone: 3*(32*4 + 32*32 + 32) = 3552.
    ModelShape bare = classifier_shape(Cell::Gru, 4);
    bare.dense.clear();
    CHECK(param_count(bare) == 3552);
}

TEST_CASE("GRU forward: zero parameters give a zero hidden state") {
    const ModelShape shape{Cell::Gru, 3, 5, {}};
    Model m = zeros_like(shape);
    Rng rng(1);
    const auto xs = random_sequence(6, 3, 4, rng);
    ForwardCache cache;
    const Matrix h = forward_model(m, xs, cache);
    CHECK(h.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("GRU forward: saturated update gate passes tanh(Wx) through") {
    // Scalar cell: large b_z forces z ~ 1, W_h = 1 so h_1 = tanh(1).
    const ModelShape shape{Cell::Gru, 1, 1, {}};
    Model m = zeros_like(shape);
    m.gru.bz(0) = 100.0;
    m.gru.Wh(0, 0) = 1.0;
    std::vector<Matrix> xs = {Matrix::Constant(1, 1, 1.0)};
    ForwardCache cache;
    const Matrix h = forward_model(m, xs, cache);
    CHECK(h(0, 0) == doctest::Approx(0.7615941559557649).epsilon(1e-10));
}

TEST_CASE("GRU gates stay in range") {
    Rng rng(2);
    const ModelShape shape{Cell::Gru, 4, 8, {}};
    Model m = init_params(shape, rng);
    const auto xs = random_sequence(7, 4, 16, rng);
    ForwardCache cache;
    const Matrix h = forward_model(m, xs, cache);
    for (std::size_t t = 0; t < cache.z.size(); ++t) {
        CHECK(cache.z[t].minCoeff() > 0.0);
        CHECK(cache.z[t].maxCoeff() < 1.0);
        CHECK(cache.r[t].minCoeff() > 0.0);
        CHECK(cache.r[t].maxCoeff() < 1.0);
    }
    CHECK(h.minCoeff() > -1.0);
    CHECK(h.maxCoeff() < 1.0);
}

TEST_CASE("LSTM forward: zero parameters, scalar hand value, gate saturation") {
    {
        const ModelShape shape{Cell::Lstm, 3, 5, {}};
        Model m = zeros_like(shape);
        Rng rng(3);
        const auto xs = random_sequence(6, 3, 4, rng);
        ForwardCache cache;
        CHECK(forward_model(m, xs, cache).cwiseAbs().maxCoeff() == 0.0);
    }
    {
        // All weights 1, biases 0, x = 1, single step:
        // c1 = sigma(1) tanh(1), h1 = sigma(1) tanh(c1).
        const ModelShape shape{Cell::Lstm, 1, 1, {}};
        Model m = zeros_like(shape);
        for (Matrix* w : {&m.lstm.Wf, &m.lstm.Wi, &m.lstm.Wo, &m.lstm.Wc}) w->setOnes();
        std::vector<Matrix> xs = {Matrix::Constant(1, 1, 1.0)};
        ForwardCache cache;
        const Matrix h = forward_model(m, xs, cache);
        CHECK(cache.c[1](0, 0) == doctest::Approx(0.5567699411459397).epsilon(1e-12));
        CHECK(h(0, 0) == doctest::Approx(0.36960635293570576).epsilon(1e-12));
    }
    {
        // Saturated forget gate, closed input gate: the cell remembers c0 = 0
        // while tanh keeps h bounded.
        const ModelShape shape{Cell::Lstm, 2, 3, {}};
        Model m = zeros_like(shape);
        m.lstm.bf.setConstant(100.0);
        m.lstm.bi.setConstant(-100.0);
        Rng rng(4);
        const auto xs = random_sequence(9, 2, 5, rng);
        ForwardCache cache;
        forward_model(m, xs, cache);
        CHECK(cache.c[9].cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("softmax head normalizes and an all-zero model is uniform") {
    Rng rng(5);
    Model m = init_params(classifier_shape(Cell::Gru, 4), rng);
    const auto xs = random_sequence(7, 4, 10, rng);
    ForwardCache cache;
    const Matrix out = forward_model(m, xs, cache);
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        CHECK(std::abs(out.col(c).sum() - 1.0) < 1e-12);
        CHECK(out.col(c).minCoeff() > 0.0);
    }

    Model zero = zeros_like(classifier_shape(Cell::Gru, 4));
    const Matrix uniform = forward_model(zero, xs, cache);
    for (Eigen::Index c = 0; c < uniform.cols(); ++c) {
        for (int k = 0; k < 3; ++k) CHECK(uniform(k, c) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    }
}

TEST_CASE("scaling logits by a positive constant preserves the argmax") {
    Rng rng(6);
    for (int rep = 0; rep < 100; ++rep) {
        Vector logits(3);
        for (int k = 0; k < 3; ++k) logits(k) = rng.uniform(-3.0, 3.0);
        const double scale = rng.uniform(0.1, 10.0);
        Eigen::Index a, b;
        softmax(logits).col(0).maxCoeff(&a);
        softmax((scale * logits).eval()).col(0).maxCoeff(&b);
        CHECK(a == b);
    }
}

TEST_CASE("cce_loss values and gradient") {
    Matrix probs(3, 1), onehot = Matrix::Zero(3, 1);
    probs << 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0;
    onehot(0, 0) = 1.0;
    CHECK(cce_loss(probs, onehot).value == doctest::Approx(1.0986122886681098).epsilon(1e-14));

    probs << 0.7, 0.2, 0.1;
    CHECK(cce_loss(probs, onehot).value == doctest::Approx(0.35667494393873245).epsilon(1e-14));
    const Matrix grad = cce_loss(probs, onehot).grad;
    CHECK(grad(0, 0) == doctest::Approx(-0.3));
    CHECK(grad(1, 0) == doctest::Approx(0.2));

    // Exact prediction: zero loss; zero probability at the truth: clamped.
    Matrix exact = onehot;
    CHECK(cce_loss(exact, onehot).value == 0.0);
    Matrix zeroed(3, 1);
    zeroed << 0.0, 0.6, 0.4;
    CHECK(std::isfinite(cce_loss(zeroed, onehot).value));

    // Duplicating every sample doubles the summed loss and gradient.
    Matrix p2(3, 2), y2(3, 2);
    p2 << 0.7, 0.7, 0.2, 0.2, 0.1, 0.1;
    y2 << 1, 1, 0, 0, 0, 0;
    CHECK(cce_loss(p2, y2).value == doctest::Approx(2.0 * 0.35667494393873245).epsilon(1e-14));
}

TEST_CASE("mse_loss hand values and second-route check") {
    Matrix pred(4, 1), target = Matrix::Zero(4, 1);
    pred << 0.1, 0.0, 0.0, 0.0;
    CHECK(mse_loss(pred, target).value == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(mse_loss(target, target).value == 0.0);

    Rng rng(7);
    Matrix a(5, 8), b(5, 8);
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        a.data()[k] = rng.uniform(-1.0, 1.0);
        b.data()[k] = rng.uniform(-1.0, 1.0);
    }
    double by_hand = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
        double norm2 = 0.0;
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
            norm2 += (a(r, c) - b(r, c)) * (a(r, c) - b(r, c));
        }
        by_hand += norm2;
    }
    by_hand /= static_cast<double>(a.cols());
    CHECK(std::abs(mse_loss(a, b).value - by_hand) < 1e-15);
}

TEST_CASE("flatten/unflatten is an exact bijection") {
    Rng rng(8);
    for (const auto cell : {Cell::Gru, Cell::Lstm}) {
        Model m = init_params(classifier_shape(cell, 4), rng);
        const Vector flat = flatten(m);
        Model copy = zeros_like(m.shape);
        unflatten(flat, copy);
        const Vector again = flatten(copy);
        REQUIRE(flat.size() == again.size());
        CHECK((flat - again).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("init_params: deterministic, zero biases, centered weights") {
    Rng a(9), b(9);
    const Model m1 = init_params(classifier_shape(Cell::Gru, 4), a);
    const Model m2 = init_params(classifier_shape(Cell::Gru, 4), b);
    CHECK((flatten(m1) - flatten(m2)).cwiseAbs().maxCoeff() == 0.0);

    CHECK(m1.gru.bz.cwiseAbs().maxCoeff() == 0.0);
    CHECK(m1.gru.br.cwiseAbs().maxCoeff() == 0.0);
    CHECK(m1.dense[0].b.cwiseAbs().maxCoeff() == 0.0);

    // Mean of U_z entries across seeds within 3 sigma of the uniform-mean
    // estimator: limit = sqrt(6/64), sigma_mean = limit/sqrt(3*n).
    double mean = 0.0;
    int count = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        const Model m = init_params(classifier_shape(Cell::Gru, 4), rng);
        mean += m.gru.Uz.sum();
        count += static_cast<int>(m.gru.Uz.size());
    }
    mean /= count;
    const double limit = std::sqrt(6.0 / 64.0);
    const double sigma_mean = limit / std::sqrt(3.0 * count);
    CHECK(std::abs(mean) < 3.0 * sigma_mean);
}

TEST_CASE("gradient check: GRU and LSTM, both losses, under 1e-5") {
    Rng rng(10);
    for (const auto cell : {Cell::Gru, Cell::Lstm}) {
        {
            ModelShape shape{cell, 4, 8, {{6, Activation::ReLU}, {3, Activation::Softmax}}};
            Model m = init_params(shape, rng);
            const auto xs = random_sequence(5, 4, 8, rng);
            const Matrix y = random_onehot(3, 8, rng);
            const double err = grad_check(m, xs, y, LossKind::CrossEntropy, 1e-5, 400, 123);
            INFO("cell=" << to_string(cell) << " cce err=" << err);
            CHECK(err < 1e-5);
        }
        {
            ModelShape shape{cell, 4, 8, {{6, Activation::ReLU}, {5, Activation::Identity}}};
            Model m = init_params(shape, rng);
            const auto xs = random_sequence(5, 4, 8, rng);
            Matrix target(5, 8);
            for (Eigen::Index k = 0; k < target.size(); ++k) target.data()[k] = rng.uniform(-1.0, 1.0);
            const double err = grad_check(m, xs, target, LossKind::SquaredError, 1e-5, 400, 321);
            INFO("cell=" << to_string(cell) << " mse err=" << err);
            CHECK(err < 1e-5);
        }
    }
}

TEST_CASE("gradient check: linear model is near-exact") {
    // Identity activations with the recurrent block decoupled (zero cell
    // parameters give h = 0, and dense[0].W = 0 cuts the path back): the loss
    // is then exactly linear or constant in every single coordinate, so
    // central differences are exact up to roundoff.
    ModelShape shape{Cell::Gru, 3, 4, {{5, Activation::Identity}, {2, Activation::Identity}}};
    Model m = zeros_like(shape);
    Rng rng(11);
    for (Eigen::Index k = 0; k < m.dense[0].b.size(); ++k) m.dense[0].b(k) = rng.uniform(-0.5, 0.5);
    for (Eigen::Index k = 0; k < m.dense[1].W.size(); ++k) {
        m.dense[1].W.data()[k] = rng.uniform(-0.5, 0.5);
    }
    const auto xs = random_sequence(1, 3, 4, rng);
    Matrix target(2, 4);
    for (Eigen::Index k = 0; k < target.size(); ++k) target.data()[k] = rng.uniform(-1.0, 1.0);

    const double err = grad_check(m, xs, target, LossKind::SquaredError, 1e-4, 5000, 0);
    CHECK(err < 1e-9);
}

TEST_CASE("backward at the zero model: softmax bias gradient is probs - onehot summed") {
    Model m = zeros_like(classifier_shape(Cell::Gru, 4));
    Rng rng(12);
    const auto xs = random_sequence(7, 4, 9, rng);
    const Matrix y = random_onehot(3, 9, rng);
    double loss = 0.0;
    const Vector grad = batch_gradient(m, xs, y, LossKind::CrossEntropy, &loss);
    CHECK(loss == doctest::Approx(9.0 * std::log(3.0)).epsilon(1e-12));

    // Last three entries of the flat vector are the softmax bias.
    Vector expected = Vector::Zero(3);
    for (Eigen::Index c = 0; c < y.cols(); ++c) expected += (Vector::Constant(3, 1.0 / 3.0) - y.col(c));
    const Vector tail = grad.tail(3);
    CHECK((tail - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("duplicating a batch doubles the summed-CCE gradient") {
    Rng rng(13);
    Model m = init_params(classifier_shape(Cell::Gru, 4), rng);
    const auto xs = random_sequence(7, 4, 6, rng);
    const Matrix y = random_onehot(3, 6, rng);

    std::vector<Matrix> xs2(xs.size());
    for (std::size_t t = 0; t < xs.size(); ++t) {
        xs2[t].resize(4, 12);
        xs2[t] << xs[t], xs[t];
    }
    Matrix y2(3, 12);
    y2 << y, y;

    const Vector g1 = batch_gradient(m, xs, y, LossKind::CrossEntropy);
    const Vector g2 = batch_gradient(m, xs2, y2, LossKind::CrossEntropy);
    CHECK((g2 - 2.0 * g1).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("adam: zero gradient no-op, signed first step, bounded second step") {
    Vector params = Vector::Constant(4, 1.0);
    AdamState state = AdamState::create(4, {0.01, 0.9, 0.999, 1e-8});
    adam_step(params, Vector::Zero(4), state);
    CHECK((params - Vector::Constant(4, 1.0)).cwiseAbs().maxCoeff() == 0.0);

    // First step from a fresh state: bias correction makes the update
    // lr * g/|g| up to the epsilon regularizer.
    Vector g(4);
    g << 3.0, -0.5, 1e-3, 0.0;
    params = Vector::Constant(4, 1.0);
    AdamState fresh = AdamState::create(4, {0.01, 0.9, 0.999, 1e-8});
    Vector before = params;
    adam_step(params, g, fresh);
    for (int i = 0; i < 3; ++i) {
        const double step = params(i) - before(i);
        CHECK(std::abs(step + 0.01 * (g(i) > 0 ? 1.0 : -1.0)) < 1e-5);
    }
    CHECK(params(3) == before(3));

    // Two identical gradients: second step magnitude bounded by the first.
    Vector p2 = Vector::Constant(1, 0.0);
    AdamState s2 = AdamState::create(1, {0.01, 0.9, 0.999, 1e-8});
    Vector gg = Vector::Constant(1, 0.7);
    adam_step(p2, gg, s2);
    const double first = std::abs(p2(0));
    const double mark = p2(0);
    adam_step(p2, gg, s2);
    CHECK(std::abs(p2(0) - mark) <= first + 1e-12);

    Vector bad(1);
    bad << std::numeric_limits<double>::quiet_NaN();
    Vector pp = Vector::Zero(1);
    AdamState s3 = AdamState::create(1, {});
    CHECK_THROWS_AS(adam_step(pp, bad, s3), Error);
}

TEST_CASE("model checkpoint round-trip and shape validation") {
    Rng rng(14);
    Model m = init_params(classifier_shape(Cell::Lstm, 4), rng);
    TempFile file("model.mnm");
    save_model(m, file.path);
    const Model loaded = load_model(file.path);
    CHECK(loaded.shape.cell == Cell::Lstm);
    CHECK((flatten(loaded) - flatten(m)).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(load_model("/nonexistent/model.mnm"), IoError);

    TempFile bad("model_bad.mnm");
    {
        std::FILE* f = std::fopen(bad.path.c_str(), "w");
        std::fputs("markovnet-model v1\ngru 4 32 dense 16 relu dense 3 softmax\n1.0\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_model(bad.path), ParseError);
}

TEST_CASE("shape errors are reported") {
    Model m = zeros_like(classifier_shape(Cell::Gru, 4));
    Rng rng(15);
    const auto bad = random_sequence(7, 5, 3, rng);  // width 5 into input 4
    ForwardCache cache;
    CHECK_THROWS_AS(forward_model(m, bad, cache), ShapeError);
    CHECK_THROWS_AS(forward_model(m, {}, cache), ShapeError);
}
