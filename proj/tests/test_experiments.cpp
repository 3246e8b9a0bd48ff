#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "markovnet/errors.hpp"
#include "markovnet/experiments.hpp"
#include "markovnet/nn/gradcheck.hpp"

using namespace markovnet;

namespace {

DatasetConfig tiny_config(std::uint64_t seed = 7) {
    DatasetConfig config;
    config.families = {ChannelFamily::Pauli};
    config.train_size = 90;
    config.val_size = 30;
    config.test_size = 30;
    config.master_seed = seed;
    return config;
}

TrainConfig quick_train(int epochs = 30) {
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_size = 30;
    cfg.seed = 3;
    cfg.monitor_every = 0;
    return cfg;
}

// Three Gaussian blobs as constant-in-time sequences; linearly separable.
Dataset blob_dataset(std::size_t per_class, std::uint64_t seed) {
    Dataset ds;
    ds.config.grid.steps = 7;
    Rng rng(seed);
    const double centers[3][4] = {{1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0}, {0.0, 0.0, 1.0, 0.0}};
    for (std::size_t i = 0; i < 3 * per_class; ++i) {
        TimeSeriesSample s;
        const int cls = static_cast<int>(i % 3);
        s.label = static_cast<ClassLabel>(cls);
        s.features.resize(7, 4);
        for (int r = 0; r < 7; ++r) {
            for (int c = 0; c < 4; ++c) {
                s.features(r, c) = centers[cls][c] + 0.05 * rng.uniform(-1.0, 1.0);
            }
        }
        ds.train.push_back(s);
        if (i < per_class) {
            ds.val.push_back(s);
            ds.test.push_back(s);
        }
    }
    return ds;
}

}  // namespace

TEST_CASE("training is deterministic and the loss decreases on separable blobs") {
    const Dataset ds = blob_dataset(20, 11);
    TrainConfig cfg = quick_train(10);
    cfg.batch_size = 60;

    const TrainResult a = train_classifier(ds, cfg);
    const TrainResult b = train_classifier(ds, cfg);
    REQUIRE(a.metrics.loss_history.size() == b.metrics.loss_history.size());
    for (std::size_t i = 0; i < a.metrics.loss_history.size(); ++i) {
        CHECK(a.metrics.loss_history[i] == b.metrics.loss_history[i]);
    }
    CHECK((nn::flatten(a.model) - nn::flatten(b.model)).cwiseAbs().maxCoeff() == 0.0);

    CHECK(a.metrics.loss_history.back() < a.metrics.loss_history.front());
    for (const double l : a.metrics.loss_history) CHECK(l >= 0.0);
}

TEST_CASE("evaluate: confusion rows sum to class counts, accuracy equals trace") {
    const Dataset ds = build_dataset(tiny_config());
    const TrainResult r = train_classifier(ds, quick_train(8));
    const Metrics m = evaluate(r.model, ds.test);

    int per_class[3] = {0, 0, 0};
    for (const auto& s : ds.test) ++per_class[static_cast<int>(s.label)];
    int trace = 0, total = 0;
    for (int a = 0; a < 3; ++a) {
        int row = 0;
        for (int p = 0; p < 3; ++p) {
            row += m.confusion[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)];
            total += m.confusion[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)];
        }
        CHECK(row == per_class[a]);
        trace += m.confusion[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)];
    }
    CHECK(total == static_cast<int>(ds.test.size()));
    CHECK(m.test_accuracy == doctest::Approx(static_cast<double>(trace) / total).epsilon(1e-15));

    // Permutation invariance of evaluation.
    std::vector<TimeSeriesSample> shuffled = ds.test;
    Rng rng(1);
    for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
        std::swap(shuffled[i], shuffled[rng.below(i + 1)]);
    }
    const Metrics m2 = evaluate(r.model, shuffled);
    CHECK(m2.test_accuracy == m.test_accuracy);
    CHECK(m2.confusion == m.confusion);
}

TEST_CASE("permuted labels destroy the signal") {
    Dataset ds = build_dataset(tiny_config());
    Rng rng(5);
    for (auto* split : {&ds.train, &ds.val, &ds.test}) {
        for (auto& s : *split) s.label = static_cast<ClassLabel>(rng.below(3));
    }
    const TrainResult r = train_classifier(ds, quick_train(15));
    CHECK(r.metrics.test_accuracy < 0.67);  // anything near 1/3 on 30 samples
}

TEST_CASE("noise study at F=1 equals the noiseless run") {
    const DatasetConfig base = tiny_config();
    TrainConfig cfg = quick_train(8);
    const Metrics noisy = run_noise_study(base.families, 1.0, cfg, base);
    const TrainResult plain = train_classifier(build_dataset(base), cfg);
    REQUIRE(noisy.loss_history.size() == plain.metrics.loss_history.size());
    for (std::size_t i = 0; i < noisy.loss_history.size(); ++i) {
        CHECK(noisy.loss_history[i] == plain.metrics.loss_history[i]);
    }
    CHECK(noisy.test_accuracy == plain.metrics.test_accuracy);
}

TEST_CASE("forecaster tensors, forward shape, and prediction determinism") {
    DatasetConfig config;
    config.families = {ChannelFamily::DephasingRB, ChannelFamily::PauliRB};
    config.grid.horizon = 5.0;
    config.grid.steps = 11;
    config.train_size = 36;
    config.val_size = 12;
    config.test_size = 12;
    config.master_seed = 9;
    const Dataset ds = build_dataset(config);

    const BatchTensors tensors = assemble_tensors(ds.train, Arch::Forecaster);
    REQUIRE(tensors.xs.size() == 8);
    REQUIRE(tensors.targets.rows() == 12);

    // Targets are the last three rows flattened step-major.
    const auto& f = ds.train[0].features;
    for (int t = 0; t < 3; ++t) {
        for (int c = 0; c < 4; ++c) {
            CHECK(tensors.targets(4 * t + c, 0) == f(8 + t, c));
        }
    }

    Rng rng(2);
    nn::Model model = nn::init_params(nn::forecaster_shape(nn::Cell::Gru, 4, 12), rng);
    const Eigen::MatrixXd prefix = f.topRows(8);
    const Eigen::MatrixXd p1 = forecast(model, prefix);
    const Eigen::MatrixXd p2 = forecast(model, prefix);
    REQUIRE(p1.rows() == 3);
    REQUIRE(p1.cols() == 4);
    CHECK((p1 - p2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(p1.allFinite());

    const double mse = forecast_mse(model, ds.test);
    CHECK(std::isfinite(mse));
    CHECK(mse >= 0.0);

    CHECK_THROWS_AS(forecast(model, Eigen::MatrixXd::Zero(8, 3)), ShapeError);
}

TEST_CASE("model/dataset width mismatch is a shape error") {
    const Dataset ds = build_dataset(tiny_config());
    Rng rng(3);
    const nn::Model wide = nn::init_params(nn::classifier_shape(nn::Cell::Gru, 16), rng);
    CHECK_THROWS_AS(evaluate(wide, ds.test), ShapeError);
}

TEST_CASE("length sweep emits one row per (family, T) with five runs") {
    // Miniature sweep exercising the aggregation path, not the paper scale.
    TrainConfig cfg = quick_train(2);  // two epochs: exercises aggregation, not accuracy
    cfg.batch_size = 600;
    const std::vector<SweepRow> rows = run_length_sweep({ChannelFamily::DephasingRB}, {1.0}, cfg, 2);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].steps == 3);
    CHECK(rows[0].horizon == 1.0);
    double mean = 0.0;
    for (const double a : rows[0].run_accuracy) mean += a;
    CHECK(rows[0].mean_accuracy == doctest::Approx(mean / 5.0).epsilon(1e-12));
    CHECK(rows[0].std_accuracy >= 0.0);
}

TEST_CASE("metrics serialization writes parseable JSON and CSV") {
    Metrics m;
    m.train_accuracy = 0.5;
    m.test_accuracy = 0.25;
    m.loss_history = {1.0, 0.5};
    m.confusion[0][0] = 3;
    const std::string json = metrics_to_json(m);
    CHECK(json.find("\"test_accuracy\"") != std::string::npos);
    CHECK(json.find("\"confusion\"") != std::string::npos);

    write_metrics_json(m, "/tmp/markovnet_metrics.json");
    write_loss_csv(m, "/tmp/markovnet_loss.csv");
    std::remove("/tmp/markovnet_metrics.json");
    std::remove("/tmp/markovnet_loss.csv");
}
