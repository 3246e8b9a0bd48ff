#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "markovnet/dataset.hpp"
#include "markovnet/nn/loss.hpp"
#include "markovnet/nn/model.hpp"

namespace markovnet {

enum class Arch { Classifier, Forecaster };

struct TrainConfig {
    double lr = 1e-3;
    int epochs = 800;
    int batch_size = 720;
    std::uint64_t seed = 1;
    nn::Cell cell = nn::Cell::Gru;
    Arch arch = Arch::Classifier;
    int monitor_every = 50;  // validation cadence; 0 disables
};

struct Metrics {
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    std::array<std::array<int, 3>, 3> confusion{};  // rows actual, cols predicted
    std::vector<double> loss_history;               // per-epoch mean training loss
    std::vector<std::pair<int, double>> val_checkpoints;  // (epoch, val accuracy)
    double forecast_mse = 0.0;
};

struct TrainResult {
    nn::Model model;
    Metrics metrics;
};

// Sequence tensors for a sample set: xs[t] is input x N. For the forecaster
// the inputs stop after input_steps and targets hold the remaining rows
// flattened step-major.
struct BatchTensors {
    std::vector<nn::Matrix> xs;
    nn::Matrix targets;
    std::vector<int> labels;
};
BatchTensors assemble_tensors(const std::vector<TimeSeriesSample>& samples, Arch arch,
                              int input_steps = 8);

// Minibatch Adam training of the classification architecture; final-epoch
// model, no early stopping. Throws DivergenceError on non-finite loss.
TrainResult train_classifier(const Dataset& ds, const TrainConfig& cfg);

// Accuracy + confusion matrix of a trained classifier on a sample set.
Metrics evaluate(const nn::Model& model, const std::vector<TimeSeriesSample>& samples);

// Builds a Werner-noise dataset at the given fidelity, trains, evaluates.
Metrics run_noise_study(const std::vector<ChannelFamily>& families, double fidelity,
                        const TrainConfig& cfg, const DatasetConfig& base);

struct SweepRow {
    ChannelFamily family;
    double horizon = 0.0;
    int steps = 0;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    std::array<double, 5> run_accuracy{};
};

// For each family and final time T: grid dt = 0.5 (steps = 2T+1), 6000/750/750
// splits, five runs with seeds {base..base+4}; reports mean and standard
// deviation of test accuracy. jobs caps concurrent runs.
std::vector<SweepRow> run_length_sweep(const std::vector<ChannelFamily>& families,
                                       const std::vector<double>& horizons, const TrainConfig& cfg,
                                       int jobs = 1);

// Trains on train_family, evaluates on an independently seeded test_family
// test split.
Metrics run_generalization(ChannelFamily train_family, ChannelFamily test_family,
                           const TrainConfig& cfg);

struct ForecastResult {
    nn::Model model;
    Metrics metrics;
    Dataset dataset;  // the forecasting dataset (11 points, T = 5)
};

// GRU(64) -> 64 ReLU -> 12 forecaster on mixed DephasingRB + PauliRB
// diagonals: 8 input steps, 3 predicted steps x 4 components.
ForecastResult train_forecaster(const TrainConfig& cfg);

// Predicts the next 3 steps (rows) of the 4 Bell diagonals from an 8x4 prefix.
Eigen::MatrixXd forecast(const nn::Model& model, const Eigen::MatrixXd& prefix);

// Mean over samples of the squared residual norm on the forecast task.
double forecast_mse(const nn::Model& model, const std::vector<TimeSeriesSample>& samples);

// --- metrics serialization ---

std::string metrics_to_json(const Metrics& m);
void write_metrics_json(const Metrics& m, const std::string& path);
void write_loss_csv(const Metrics& m, const std::string& path);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);
void write_forecast_csv(const nn::Model& model, const std::vector<TimeSeriesSample>& samples,
                        std::size_t max_samples, const std::string& path);

// Runs fn(0..n-1) on up to `jobs` worker threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace markovnet
