#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "markovnet/choi.hpp"
#include "markovnet/liouville.hpp"
#include "markovnet/rates.hpp"
#include "markovnet/rng.hpp"

namespace markovnet {

enum class ClassLabel : int { Semigroup = 0, Markovian = 1, NonMarkovian = 2 };

// Dephasing is the fixed-axis (theta = 0) special case used only for the
// generalization study; the four paper families are the others.
enum class ChannelFamily { Dephasing, DephasingRB, Pauli, PauliRB, Gad };

constexpr std::array<ChannelFamily, 4> kAllFamilies = {
    ChannelFamily::DephasingRB, ChannelFamily::Pauli, ChannelFamily::PauliRB, ChannelFamily::Gad};

std::string to_string(ClassLabel label);
std::string to_string(ChannelFamily family);
ChannelFamily family_from_string(const std::string& name);

// One sampled channel instance: everything needed to evaluate its Choi state
// analytically at any time.
struct ChannelSpec {
    ChannelFamily family = ChannelFamily::DephasingRB;
    ClassLabel label = ClassLabel::Semigroup;
    double theta = 0.0;   // dephasing axis polar angle
    double varphi = 0.0;  // dephasing axis azimuth
    EulerAngles euler;    // PauliRB reference rotation
    std::vector<DecayRateSpec> rates;   // 1 for dephasing, 3 for Pauli; empty for GAD
    std::array<double, 2> gad_coeffs{};  // semigroup {g1,g2}; otherwise {p,b}
};

// Draws one channel instance per the per-class recipes (Appendix C
// families). Draw order is fixed; the caller owns rng stream placement.
ChannelSpec sample_channel(ChannelFamily family, ClassLabel label, Rng& rng);

// GAD parameter trajectories per class. coeffs as in ChannelSpec::gad_coeffs.
GadParams gad_trajectory(ClassLabel label, const std::array<double, 2>& coeffs, double t);

// Canonical GAD rates (gamma1, gamma2) at time t for the same trajectories.
std::array<double, 2> gad_rates(ClassLabel label, const std::array<double, 2>& coeffs, double t);

// Analytic Choi state of the sampled channel at time t.
ChoiMatrix choi_at(const ChannelSpec& spec, double t);

std::vector<ChoiMatrix> choi_series(const ChannelSpec& spec, const std::vector<double>& times);

// Jump operators and rate functions generating the sampled channel, in the
// normalization expected by evolve_choi_numerical.
struct GeneratorModel {
    std::vector<Matrix2c> ops;
    std::vector<RateFn> rates;
};
GeneratorModel oracle_model(const ChannelSpec& spec);

// Classifies the spec by its rate functions alone: some rate below -1e-12 on
// a dt-spaced grid over [0, horizon] -> NonMarkovian; all rates constant ->
// Semigroup (for rate-spec families this is "all Constant kind"); otherwise
// Markovian.
ClassLabel sign_rule_label(const ChannelSpec& spec, double horizon, double dt = 1e-3);

// Classifies recovered canonical rates: negative excursion below -neg_tol ->
// NonMarkovian; all sorted rate streams constant within const_tol ->
// Semigroup; otherwise Markovian.
ClassLabel rate_label(const RateSeries& series, double neg_tol = 1e-4, double const_tol = 1e-3);

}  // namespace markovnet
