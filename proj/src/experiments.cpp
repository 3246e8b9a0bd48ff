#include "markovnet/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include <nlohmann/json.hpp>

#include "markovnet/errors.hpp"
#include "markovnet/nn/adam.hpp"

namespace markovnet {

namespace {

using nn::Matrix;
using nn::Vector;

Matrix onehot_targets(const std::vector<int>& labels) {
    Matrix y = Matrix::Zero(3, static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) y(labels[i], static_cast<Eigen::Index>(i)) = 1.0;
    return y;
}

std::vector<Matrix> gather_columns(const std::vector<Matrix>& xs, const std::vector<int>& order,
                                   std::size_t begin, std::size_t count) {
    std::vector<Matrix> out(xs.size());
    for (std::size_t t = 0; t < xs.size(); ++t) {
        out[t].resize(xs[t].rows(), static_cast<Eigen::Index>(count));
        for (std::size_t c = 0; c < count; ++c) {
            out[t].col(static_cast<Eigen::Index>(c)) = xs[t].col(order[begin + c]);
        }
    }
    return out;
}

Matrix gather_columns(const Matrix& m, const std::vector<int>& order, std::size_t begin,
                      std::size_t count) {
    Matrix out(m.rows(), static_cast<Eigen::Index>(count));
    for (std::size_t c = 0; c < count; ++c) {
        out.col(static_cast<Eigen::Index>(c)) = m.col(order[begin + c]);
    }
    return out;
}

int argmax_col(const Matrix& m, Eigen::Index col) {
    Eigen::Index best = 0;
    m.col(col).maxCoeff(&best);
    return static_cast<int>(best);
}

double accuracy_on(const nn::Model& model, const BatchTensors& tensors) {
    nn::ForwardCache cache;
    const Matrix out = nn::forward_model(model, tensors.xs, cache);
    std::size_t correct = 0;
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        if (argmax_col(out, c) == tensors.labels[static_cast<std::size_t>(c)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(out.cols());
}

TrainResult train_on_tensors(const BatchTensors& train, const BatchTensors& val,
                             const TrainConfig& cfg, nn::LossKind loss_kind,
                             const nn::ModelShape& shape) {
    Rng init_rng = Rng::for_index(cfg.seed, 0);
    Rng shuffle_rng = Rng::for_index(cfg.seed, 1);

    TrainResult result;
    result.model = nn::init_params(shape, init_rng);
    Vector params = nn::flatten(result.model);
    nn::AdamState adam = nn::AdamState::create(params.size(), {cfg.lr, 0.9, 0.999, 1e-8});

    const std::size_t n = static_cast<std::size_t>(train.targets.cols());
    const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    result.metrics.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = n - 1; i > 0; --i) {
            const auto j = shuffle_rng.below(i + 1);
            std::swap(order[i], order[j]);
        }
        double epoch_loss = 0.0;
        for (std::size_t begin = 0; begin < n; begin += batch) {
            const std::size_t count = std::min(batch, n - begin);
            const auto xs = gather_columns(train.xs, order, begin, count);
            const Matrix targets = gather_columns(train.targets, order, begin, count);

            nn::ForwardCache cache;
            const Matrix out = nn::forward_model(result.model, xs, cache);
            const nn::LossValue loss = loss_kind == nn::LossKind::CrossEntropy
                                           ? nn::cce_loss(out, targets)
                                           : nn::mse_loss(out, targets);
            epoch_loss += loss_kind == nn::LossKind::CrossEntropy
                              ? loss.value
                              : loss.value * static_cast<double>(count);

            nn::Gradients grads = nn::zeros_like(shape);
            nn::backward_model(result.model, xs, cache, loss.grad, grads);
            adam_step(params, nn::flatten(grads), adam);
            nn::unflatten(params, result.model);
        }
        const double mean_loss = epoch_loss / static_cast<double>(n);
        if (!std::isfinite(mean_loss)) throw DivergenceError("training loss diverged", epoch);
        result.metrics.loss_history.push_back(mean_loss);

        if (cfg.monitor_every > 0 && loss_kind == nn::LossKind::CrossEntropy &&
            (epoch + 1) % cfg.monitor_every == 0 && val.targets.cols() > 0) {
            result.metrics.val_checkpoints.emplace_back(epoch + 1, accuracy_on(result.model, val));
        }
    }
    return result;
}

}  // namespace

BatchTensors assemble_tensors(const std::vector<TimeSeriesSample>& samples, Arch arch,
                              int input_steps) {
    if (samples.empty()) throw ParameterError("assemble_tensors: empty sample set");
    const auto steps = samples.front().features.rows();
    const auto width = samples.front().features.cols();
    const auto n = static_cast<Eigen::Index>(samples.size());

    BatchTensors out;
    const Eigen::Index in_steps = arch == Arch::Classifier ? steps : input_steps;
    if (arch == Arch::Forecaster && steps <= in_steps) {
        throw ShapeError("forecast task needs more grid steps than input steps");
    }
    out.xs.assign(static_cast<std::size_t>(in_steps), Matrix(width, n));
    if (arch == Arch::Forecaster) {
        out.targets.resize((steps - in_steps) * width, n);
    }
    out.labels.reserve(samples.size());
    for (Eigen::Index s = 0; s < n; ++s) {
        const auto& f = samples[static_cast<std::size_t>(s)].features;
        if (f.rows() != steps || f.cols() != width) {
            throw ShapeError("inconsistent sample dimensions");
        }
        for (Eigen::Index t = 0; t < in_steps; ++t) {
            out.xs[static_cast<std::size_t>(t)].col(s) = f.row(t).transpose();
        }
        if (arch == Arch::Forecaster) {
            for (Eigen::Index t = in_steps; t < steps; ++t) {
                out.targets.block((t - in_steps) * width, s, width, 1) = f.row(t).transpose();
            }
        }
        out.labels.push_back(static_cast<int>(samples[static_cast<std::size_t>(s)].label));
    }
    if (arch == Arch::Classifier) out.targets = onehot_targets(out.labels);
    return out;
}

TrainResult train_classifier(const Dataset& ds, const TrainConfig& cfg) {
    const BatchTensors train = assemble_tensors(ds.train, Arch::Classifier);
    const BatchTensors val = assemble_tensors(ds.val, Arch::Classifier);
    const int input = static_cast<int>(train.xs.front().rows());
    TrainResult result = train_on_tensors(train, val, cfg, nn::LossKind::CrossEntropy,
                                          nn::classifier_shape(cfg.cell, input));
    result.metrics.train_accuracy = accuracy_on(result.model, train);
    const Metrics test = evaluate(result.model, ds.test);
    result.metrics.test_accuracy = test.test_accuracy;
    result.metrics.confusion = test.confusion;
    return result;
}

Metrics evaluate(const nn::Model& model, const std::vector<TimeSeriesSample>& samples) {
    if (samples.empty()) throw ParameterError("evaluate: empty sample set");
    const BatchTensors tensors = assemble_tensors(samples, Arch::Classifier);
    if (model.shape.input != tensors.xs.front().rows()) {
        throw ShapeError("model input width does not match dataset feature width");
    }
    nn::ForwardCache cache;
    const Matrix out = nn::forward_model(model, tensors.xs, cache);

    Metrics m;
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        const int actual = tensors.labels[static_cast<std::size_t>(c)];
        const int predicted = argmax_col(out, c);
        ++m.confusion[static_cast<std::size_t>(actual)][static_cast<std::size_t>(predicted)];
    }
    int trace = 0;
    for (int k = 0; k < 3; ++k) trace += m.confusion[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)];
    m.test_accuracy = static_cast<double>(trace) / static_cast<double>(samples.size());
    return m;
}

Metrics run_noise_study(const std::vector<ChannelFamily>& families, double fidelity,
                        const TrainConfig& cfg, const DatasetConfig& base) {
    DatasetConfig config = base;
    config.families = families;
    config.fidelity = fidelity;
    config.mode = FeatureMode::Diagonal;
    const Dataset ds = build_dataset(config);
    TrainResult result = train_classifier(ds, cfg);
    return result.metrics;
}

std::vector<SweepRow> run_length_sweep(const std::vector<ChannelFamily>& families,
                                       const std::vector<double>& horizons, const TrainConfig& cfg,
                                       int jobs) {
    struct Task {
        ChannelFamily family;
        double horizon;
        int run;
    };
    std::vector<Task> tasks;
    for (const auto family : families) {
        for (const double horizon : horizons) {
            for (int run = 0; run < 5; ++run) tasks.push_back({family, horizon, run});
        }
    }
    std::vector<double> acc(tasks.size(), 0.0);
    parallel_for(tasks.size(), jobs, [&](std::size_t i) {
        const Task& task = tasks[i];
        DatasetConfig config;
        config.families = {task.family};
        config.grid.horizon = task.horizon;
        config.grid.steps = static_cast<int>(std::lround(2.0 * task.horizon)) + 1;
        config.train_size = 6000;
        config.val_size = 750;
        config.test_size = 750;
        config.master_seed = cfg.seed + static_cast<std::uint64_t>(task.run);

        TrainConfig run_cfg = cfg;
        run_cfg.seed = cfg.seed + static_cast<std::uint64_t>(task.run);
        run_cfg.batch_size = 600;
        run_cfg.monitor_every = 0;
        const Dataset ds = build_dataset(config);
        acc[i] = train_classifier(ds, run_cfg).metrics.test_accuracy;
    });

    std::vector<SweepRow> rows;
    std::size_t at = 0;
    for (const auto family : families) {
        for (const double horizon : horizons) {
            SweepRow row;
            row.family = family;
            row.horizon = horizon;
            row.steps = static_cast<int>(std::lround(2.0 * horizon)) + 1;
            double sum = 0.0;
            for (int run = 0; run < 5; ++run) {
                row.run_accuracy[static_cast<std::size_t>(run)] = acc[at];
                sum += acc[at++];
            }
            row.mean_accuracy = sum / 5.0;
            double var = 0.0;
            for (const double a : row.run_accuracy) {
                var += (a - row.mean_accuracy) * (a - row.mean_accuracy);
            }
            row.std_accuracy = std::sqrt(var / 5.0);
            rows.push_back(row);
        }
    }
    return rows;
}

Metrics run_generalization(ChannelFamily train_family, ChannelFamily test_family,
                           const TrainConfig& cfg) {
    DatasetConfig train_config;
    train_config.families = {train_family};
    train_config.master_seed = cfg.seed;
    DatasetConfig test_config;
    test_config.families = {test_family};
    test_config.master_seed = cfg.seed + 1000;

    const Dataset train_ds = build_dataset(train_config);
    const Dataset test_ds = build_dataset(test_config);
    TrainResult result = train_classifier(train_ds, cfg);
    Metrics m = evaluate(result.model, test_ds.test);
    m.train_accuracy = result.metrics.train_accuracy;
    m.loss_history = std::move(result.metrics.loss_history);
    return m;
}

ForecastResult train_forecaster(const TrainConfig& cfg) {
    DatasetConfig config;
    config.families = {ChannelFamily::DephasingRB, ChannelFamily::PauliRB};
    config.grid.horizon = 5.0;
    config.grid.steps = 11;
    config.master_seed = cfg.seed;

    ForecastResult result;
    result.dataset = build_dataset(config);
    const BatchTensors train = assemble_tensors(result.dataset.train, Arch::Forecaster);
    const BatchTensors val = assemble_tensors(result.dataset.val, Arch::Forecaster);
    const int input = static_cast<int>(train.xs.front().rows());
    const int output = static_cast<int>(train.targets.rows());

    TrainResult trained = train_on_tensors(train, val, cfg, nn::LossKind::SquaredError,
                                           nn::forecaster_shape(cfg.cell, input, output));
    result.model = std::move(trained.model);
    result.metrics = std::move(trained.metrics);
    result.metrics.forecast_mse = forecast_mse(result.model, result.dataset.test);
    return result;
}

Eigen::MatrixXd forecast(const nn::Model& model, const Eigen::MatrixXd& prefix) {
    const auto width = prefix.cols();
    if (model.shape.input != width) throw ShapeError("prefix width does not match model input");
    std::vector<Matrix> xs(static_cast<std::size_t>(prefix.rows()));
    for (Eigen::Index t = 0; t < prefix.rows(); ++t) {
        xs[static_cast<std::size_t>(t)] = prefix.row(t).transpose();
    }
    nn::ForwardCache cache;
    const Matrix out = nn::forward_model(model, xs, cache);
    if (out.rows() % width != 0) throw ShapeError("output width is not a multiple of components");
    Eigen::MatrixXd reshaped(out.rows() / width, width);
    for (Eigen::Index t = 0; t < reshaped.rows(); ++t) {
        reshaped.row(t) = out.col(0).segment(t * width, width).transpose();
    }
    return reshaped;
}

double forecast_mse(const nn::Model& model, const std::vector<TimeSeriesSample>& samples) {
    const BatchTensors tensors = assemble_tensors(samples, Arch::Forecaster);
    nn::ForwardCache cache;
    const Matrix out = nn::forward_model(model, tensors.xs, cache);
    return nn::mse_loss(out, tensors.targets).value;
}

std::string metrics_to_json(const Metrics& m) {
    nlohmann::json j;
    j["train_accuracy"] = m.train_accuracy;
    j["test_accuracy"] = m.test_accuracy;
    j["confusion"] = m.confusion;
    j["loss_history"] = m.loss_history;
    if (!m.val_checkpoints.empty()) {
        nlohmann::json v = nlohmann::json::array();
        for (const auto& [epoch, acc] : m.val_checkpoints) v.push_back({{"epoch", epoch}, {"accuracy", acc}});
        j["validation"] = v;
    }
    if (m.forecast_mse > 0.0) j["forecast_mse"] = m.forecast_mse;
    return j.dump(2);
}

void write_metrics_json(const Metrics& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << metrics_to_json(m) << "\n";
}

void write_loss_csv(const Metrics& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "epoch,loss\n";
    for (std::size_t i = 0; i < m.loss_history.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i + 1, m.loss_history[i]);
        out << buf;
    }
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "family,T,steps,mean_accuracy,std_accuracy\n";
    for (const auto& row : rows) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s,%g,%d,%.6f,%.6f\n", to_string(row.family).c_str(),
                      row.horizon, row.steps, row.mean_accuracy, row.std_accuracy);
        out << buf;
    }
}

void write_forecast_csv(const nn::Model& model, const std::vector<TimeSeriesSample>& samples,
                        std::size_t max_samples, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "sample,step,component,actual,predicted\n";
    const std::size_t n = std::min(max_samples, samples.size());
    for (std::size_t s = 0; s < n; ++s) {
        const auto& f = samples[s].features;
        const Eigen::MatrixXd pred = forecast(model, f.topRows(8));
        for (Eigen::Index t = 0; t < pred.rows(); ++t) {
            for (Eigen::Index c = 0; c < pred.cols(); ++c) {
                char buf[128];
                std::snprintf(buf, sizeof(buf), "%zu,%ld,%ld,%.17g,%.17g\n", s,
                              static_cast<long>(t + 8), static_cast<long>(c), f(8 + t, c),
                              pred(t, c));
                out << buf;
            }
        }
    }
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace markovnet
