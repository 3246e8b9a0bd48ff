#include "markovnet/dataset.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "markovnet/errors.hpp"

namespace markovnet {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

bool has_gz_suffix(const std::string& path) {
    return path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

std::string read_all(const std::string& path) {
    if (has_gz_suffix(path)) {
        gzFile f = gzopen(path.c_str(), "rb");
        if (!f) throw IoError("cannot open " + path);
        std::string content;
        char buf[1 << 16];
        int n = 0;
        while ((n = gzread(f, buf, sizeof(buf))) > 0) content.append(buf, static_cast<std::size_t>(n));
        const bool bad = n < 0;
        gzclose(f);
        if (bad) throw IoError("gzip read failed for " + path);
        return content;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_all(const std::string& path, const std::string& content) {
    if (has_gz_suffix(path)) {
        gzFile f = gzopen(path.c_str(), "wb");
        if (!f) throw IoError("cannot open " + path + " for writing");
        const int written = gzwrite(f, content.data(), static_cast<unsigned>(content.size()));
        gzclose(f);
        if (written != static_cast<int>(content.size())) throw IoError("gzip write failed for " + path);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw IoError("write failed for " + path);
}

std::vector<std::string> split_string(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

double parse_double(const std::string& s, std::size_t line) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw ParseError("malformed number '" + s + "'", line);
    return v;
}

void validate_sample_rows(const Eigen::MatrixXd& features, std::size_t sample_index) {
    for (int r = 0; r < features.rows(); ++r) {
        double sum = 0.0;
        for (int c = 0; c < 4; ++c) {
            const double v = features(r, c);
            if (v < -1e-10 || v > 1.0 + 1e-10) {
                throw ValidationError("sample " + std::to_string(sample_index) +
                                      ": diagonal feature outside [0,1] at step " + std::to_string(r));
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-10) {
            throw ValidationError("sample " + std::to_string(sample_index) +
                                  ": diagonal features sum to " + format_double(sum) + " at step " +
                                  std::to_string(r));
        }
    }
}

}  // namespace

std::vector<double> TimeGrid::times() const {
    if (steps < 2) throw ParameterError("TimeGrid needs at least 2 steps");
    std::vector<double> ts(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        ts[static_cast<std::size_t>(i)] = t0 + (horizon - t0) * i / (steps - 1);
    }
    return ts;
}

std::string to_string(FeatureMode mode) {
    return mode == FeatureMode::Diagonal ? "diagonal" : "full";
}

FeatureMode feature_mode_from_string(const std::string& name) {
    if (name == "diagonal") return FeatureMode::Diagonal;
    if (name == "full") return FeatureMode::Full;
    throw ParameterError("unknown feature mode: " + name);
}

BellDiagonal apply_werner_noise(const BellDiagonal& diag, double fidelity) {
    if (fidelity < 0.0 || fidelity > 1.0) throw ParameterError("fidelity outside [0,1]");
    BellDiagonal out;
    const double total = diag[0] + diag[1] + diag[2] + diag[3];
    for (int j = 0; j < 4; ++j) {
        out[j] = fidelity * diag[j] + (1.0 - fidelity) / 3.0 * (total - diag[j]);
    }
    return out;
}

Eigen::VectorXd feature_row(const ChoiMatrix& c, FeatureMode mode) {
    const Matrix4c b = to_bell_basis(c);
    if (mode == FeatureMode::Diagonal) {
        Eigen::VectorXd row(4);
        for (int i = 0; i < 4; ++i) row(i) = b(i, i).real();
        return row;
    }
    Eigen::VectorXd row(16);
    for (int i = 0; i < 4; ++i) row(i) = b(i, i).real();
    int k = 4;
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            row(k++) = b(i, j).real();
            row(k++) = b(i, j).imag();
        }
    }
    return row;
}

TimeSeriesSample features_series(const ChannelSpec& spec, const TimeGrid& grid, FeatureMode mode) {
    const auto ts = grid.times();
    const int width = mode == FeatureMode::Diagonal ? 4 : 16;
    TimeSeriesSample sample;
    sample.features.resize(grid.steps, width);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        sample.features.row(static_cast<int>(i)) = feature_row(choi_at(spec, ts[i]), mode);
    }
    sample.label = spec.label;
    sample.family = spec.family;
    sample.spec = spec;
    return sample;
}

std::pair<ClassLabel, ChannelFamily> split_assignment(std::size_t idx,
                                                      const std::vector<ChannelFamily>& families) {
    const auto label = static_cast<ClassLabel>(idx % 3);
    const ChannelFamily family = families[(idx / 3) % families.size()];
    return {label, family};
}

ChannelSpec spec_for_index(const DatasetConfig& config, std::size_t index) {
    const std::size_t sizes[3] = {config.train_size, config.val_size, config.test_size};
    std::size_t local = index;
    for (const std::size_t size : sizes) {
        if (local < size) {
            const auto [label, family] = split_assignment(local, config.families);
            Rng rng = Rng::for_index(config.master_seed, index);
            return sample_channel(family, label, rng);
        }
        local -= size;
    }
    throw ParameterError("sample index out of range");
}

Dataset build_dataset(const DatasetConfig& config) {
    if (config.families.empty()) throw ParameterError("dataset needs at least one family");
    if (config.train_size == 0 || config.val_size == 0 || config.test_size == 0) {
        throw ParameterError("split sizes must be positive");
    }
    if (config.mode == FeatureMode::Full && config.fidelity < 1.0) {
        throw ParameterError("noise is defined on Bell diagonals only; full mode requires fidelity = 1");
    }
    if (config.fidelity < 0.0 || config.fidelity > 1.0) throw ParameterError("fidelity outside [0,1]");

    Dataset ds;
    ds.config = config;
    const std::size_t sizes[3] = {config.train_size, config.val_size, config.test_size};
    std::vector<TimeSeriesSample>* splits[3] = {&ds.train, &ds.val, &ds.test};

    std::size_t global = 0;
    for (int s = 0; s < 3; ++s) {
        splits[s]->reserve(sizes[s]);
        for (std::size_t i = 0; i < sizes[s]; ++i, ++global) {
            const auto [label, family] = split_assignment(i, config.families);
            Rng rng = Rng::for_index(config.master_seed, global);
            const ChannelSpec spec = sample_channel(family, label, rng);
            TimeSeriesSample sample = features_series(spec, config.grid, config.mode);
            if (config.fidelity < 1.0) {
                for (int r = 0; r < sample.features.rows(); ++r) {
                    BellDiagonal d;
                    for (int c = 0; c < 4; ++c) d[c] = sample.features(r, c);
                    d = apply_werner_noise(d, config.fidelity);
                    for (int c = 0; c < 4; ++c) sample.features(r, c) = d[c];
                }
            }
            splits[s]->push_back(std::move(sample));
        }
    }
    return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
    std::string out;
    out.reserve(ds.total() * 512);
    out += "markovnet-dataset v1\n";
    out += "mode=" + to_string(ds.config.mode) + "\n";
    out += "fidelity=" + format_double(ds.config.fidelity) + "\n";
    out += "T=" + format_double(ds.config.grid.horizon) + "\n";
    out += "steps=" + std::to_string(ds.config.grid.steps) + "\n";
    out += "seed=" + std::to_string(ds.config.master_seed) + "\n";
    out += "families=";
    for (std::size_t i = 0; i < ds.config.families.size(); ++i) {
        if (i) out += ",";
        out += to_string(ds.config.families[i]);
    }
    out += "\n";
    out += "train=" + std::to_string(ds.config.train_size) + "\n";
    out += "val=" + std::to_string(ds.config.val_size) + "\n";
    out += "test=" + std::to_string(ds.config.test_size) + "\n";

    const std::vector<TimeSeriesSample>* splits[3] = {&ds.train, &ds.val, &ds.test};
    for (const auto* split : splits) {
        for (const auto& sample : *split) {
            out += std::to_string(static_cast<int>(sample.label));
            out += ",";
            out += to_string(sample.family);
            for (int r = 0; r < sample.features.rows(); ++r) {
                for (int c = 0; c < sample.features.cols(); ++c) {
                    out += ",";
                    out += format_double(sample.features(r, c));
                }
            }
            out += "\n";
        }
    }
    write_all(path, out);
}

Dataset load_dataset(const std::string& path) {
    const std::string content = read_all(path);
    std::istringstream in(content);
    std::string line;
    std::size_t lineno = 0;

    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    };

    if (!next_line()) throw ParseError("empty dataset file", 1);
    if (line != "markovnet-dataset v1") {
        if (line.rfind("markovnet-dataset", 0) == 0) {
            throw VersionError("unsupported dataset version: " + line);
        }
        throw ParseError("missing dataset header", lineno);
    }

    Dataset ds;
    bool in_metadata = true;
    std::size_t loaded = 0;
    int width = 0;
    while (next_line()) {
        const auto eq = line.find('=');
        const auto comma = line.find(',');
        if (in_metadata && eq != std::string::npos && (comma == std::string::npos || eq < comma)) {
            const auto pos = eq;
            const std::string key = line.substr(0, pos);
            const std::string value = line.substr(pos + 1);
            if (key == "mode") ds.config.mode = feature_mode_from_string(value);
            else if (key == "fidelity") ds.config.fidelity = parse_double(value, lineno);
            else if (key == "T") ds.config.grid.horizon = parse_double(value, lineno);
            else if (key == "steps") ds.config.grid.steps = static_cast<int>(parse_double(value, lineno));
            else if (key == "seed") ds.config.master_seed = std::stoull(value);
            else if (key == "train") ds.config.train_size = std::stoull(value);
            else if (key == "val") ds.config.val_size = std::stoull(value);
            else if (key == "test") ds.config.test_size = std::stoull(value);
            else if (key == "families") {
                ds.config.families.clear();
                for (const auto& name : split_string(value, ',')) {
                    ds.config.families.push_back(family_from_string(name));
                }
            } else {
                throw ParseError("unknown metadata key '" + key + "'", lineno);
            }
            continue;
        }
        in_metadata = false;
        if (width == 0) width = ds.config.mode == FeatureMode::Diagonal ? 4 : 16;

        const auto tokens = split_string(line, ',');
        const std::size_t expected = 2 + static_cast<std::size_t>(ds.config.grid.steps) *
                                             static_cast<std::size_t>(width);
        if (tokens.size() != expected) {
            throw ParseError("record has " + std::to_string(tokens.size()) + " fields, expected " +
                                 std::to_string(expected),
                             lineno);
        }
        TimeSeriesSample sample;
        const int label = static_cast<int>(parse_double(tokens[0], lineno));
        if (label < 0 || label > 2) throw ParseError("label must be 0, 1 or 2", lineno);
        sample.label = static_cast<ClassLabel>(label);
        sample.family = family_from_string(tokens[1]);
        sample.features.resize(ds.config.grid.steps, width);
        std::size_t k = 2;
        for (int r = 0; r < ds.config.grid.steps; ++r) {
            for (int c = 0; c < width; ++c) {
                sample.features(r, c) = parse_double(tokens[k++], lineno);
            }
        }
        validate_sample_rows(sample.features, loaded);

        if (loaded < ds.config.train_size) ds.train.push_back(std::move(sample));
        else if (loaded < ds.config.train_size + ds.config.val_size) ds.val.push_back(std::move(sample));
        else ds.test.push_back(std::move(sample));
        ++loaded;
    }

    const std::size_t expected_total = ds.config.train_size + ds.config.val_size + ds.config.test_size;
    if (loaded != expected_total) {
        throw ParseError("file truncated: " + std::to_string(loaded) + " of " +
                             std::to_string(expected_total) + " records",
                         lineno + 1);
    }
    return ds;
}

}  // namespace markovnet
