#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "markovnet/channel.hpp"

namespace markovnet {

struct TimeGrid {
    double t0 = 0.0;
    double horizon = 3.0;  // T
    int steps = 7;

    double dt() const { return (horizon - t0) / (steps - 1); }
    std::vector<double> times() const;
};

enum class FeatureMode { Diagonal, Full };

std::string to_string(FeatureMode mode);
FeatureMode feature_mode_from_string(const std::string& name);

// One labeled time series: steps x d feature matrix, d = 4 (Bell diagonals)
// or 16 (diagonals + Re/Im of the 6 upper-triangular Bell entries).
struct TimeSeriesSample {
    Eigen::MatrixXd features;
    ClassLabel label = ClassLabel::Semigroup;
    ChannelFamily family = ChannelFamily::DephasingRB;
    std::optional<ChannelSpec> spec;  // provenance; not serialized
};

struct DatasetConfig {
    std::vector<ChannelFamily> families = {ChannelFamily::DephasingRB};
    TimeGrid grid;
    FeatureMode mode = FeatureMode::Diagonal;
    double fidelity = 1.0;
    std::size_t train_size = 7200;
    std::size_t val_size = 900;
    std::size_t test_size = 900;
    std::uint64_t master_seed = 1;
};

struct Dataset {
    DatasetConfig config;
    std::vector<TimeSeriesSample> train;
    std::vector<TimeSeriesSample> val;
    std::vector<TimeSeriesSample> test;

    std::size_t total() const { return train.size() + val.size() + test.size(); }
};

// Werner-state preparation noise on Bell diagonals:
// s_j = F r_j + (1-F)/3 sum_{i != j} r_i.
BellDiagonal apply_werner_noise(const BellDiagonal& diag, double fidelity);

// Feature row at one time: Bell diagonals, then Re/Im of B01,B02,B03,B12,B13,B23.
Eigen::VectorXd feature_row(const ChoiMatrix& c, FeatureMode mode);

// Evaluates the analytic Choi at each grid time and assembles the feature
// matrix. Noise is not applied here; build_dataset owns that step.
TimeSeriesSample features_series(const ChannelSpec& spec, const TimeGrid& grid, FeatureMode mode);

// (class, family) of the idx-th sample within a split, given the family mix.
// Classes rotate fastest so every split is class-balanced within one sample.
std::pair<ClassLabel, ChannelFamily> split_assignment(std::size_t idx,
                                                      const std::vector<ChannelFamily>& families);

// Deterministically generates the full dataset: per-sample generators are
// split off the master seed by global sample index (train, then val, then
// test). Diagonal-mode features get Werner noise per time step when
// fidelity < 1; Full mode with fidelity < 1 is rejected.
Dataset build_dataset(const DatasetConfig& config);

// Regenerates the channel spec of global sample `index` under `config`
// without building the rest of the dataset (audit path).
ChannelSpec spec_for_index(const DatasetConfig& config, std::size_t index);

// Text format "markovnet-dataset v1"; .gz extension selects gzip framing.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace markovnet
