#include <doctest.h>

#include <cmath>

#include "markovnet/channel.hpp"
#include "markovnet/errors.hpp"
#include "oracle_utils.hpp"

using namespace markovnet;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("sampled specs respect their per-class recipes") {
    Rng rng(21);
    for (int i = 0; i < 50; ++i) {
        const ChannelSpec s = sample_channel(ChannelFamily::DephasingRB, ClassLabel::Semigroup, rng);
        REQUIRE(s.rates.size() == 1);
        CHECK(s.rates[0].kind == DecayRateKind::Constant);
        CHECK(s.rates[0].coeff >= 0.0);
        CHECK(s.rates[0].coeff < 1.0);
        CHECK(s.theta >= 0.0);
        CHECK(s.theta <= kPi);
    }
    for (int i = 0; i < 50; ++i) {
        const ChannelSpec s = sample_channel(ChannelFamily::Pauli, ClassLabel::NonMarkovian, rng);
        REQUIRE(s.rates.size() == 3);
        // Defining property: some rate goes negative on [0,3].
        double min_rate = 0.0;
        for (const auto& r : s.rates) {
            for (double t = 0.0; t <= 3.0; t += 1e-3) min_rate = std::min(min_rate, decay_rate(r, t));
        }
        CHECK(min_rate < 0.0);
    }
    for (int i = 0; i < 50; ++i) {
        const ChannelSpec s = sample_channel(ChannelFamily::Gad, ClassLabel::Markovian, rng);
        CHECK(s.gad_coeffs[0] >= 0.0);
        CHECK(s.gad_coeffs[0] <= 1.0);
        CHECK(s.gad_coeffs[1] >= 0.5);
        CHECK(s.gad_coeffs[1] < 1.0);
    }
    // Dephasing (fixed axis) pins theta = varphi = 0.
    const ChannelSpec d = sample_channel(ChannelFamily::Dephasing, ClassLabel::Markovian, rng);
    CHECK(d.theta == 0.0);
    CHECK(d.varphi == 0.0);
}

TEST_CASE("gad_trajectory endpoints and classes") {
    const GadParams p0 = gad_trajectory(ClassLabel::Semigroup, {0.5, 0.5}, 0.0);
    CHECK(p0.p == doctest::Approx(0.5));
    CHECK(p0.lambda == doctest::Approx(0.0));

    // tanh saturates toward 1.
    CHECK(gad_trajectory(ClassLabel::Markovian, {0.3, 0.5}, 40.0).lambda ==
          doctest::Approx(1.0).epsilon(1e-12));

    const GadParams nm = gad_trajectory(ClassLabel::NonMarkovian, {0.4, 2.0}, kPi / 4);
    CHECK(nm.lambda == doctest::Approx(0.5));

    // gamma1 + gamma2 = dlambda/dt / (1 - lambda) changes sign on [0,3].
    double lo = 0.0, hi = 0.0;
    for (double t = 0.0; t <= 3.0; t += 1e-3) {
        const auto r = gad_rates(ClassLabel::NonMarkovian, {0.4, 2.0}, t);
        lo = std::min(lo, r[0] + r[1]);
        hi = std::max(hi, r[0] + r[1]);
    }
    CHECK(lo < -1e-3);
    CHECK(hi > 1e-3);

    CHECK_THROWS_AS(gad_trajectory(ClassLabel::Markovian, {0.3, 1.5}, 1.0), ParameterError);
    CHECK_THROWS_AS(gad_trajectory(ClassLabel::NonMarkovian, {1.3, 2.5}, 1.0), ParameterError);
    CHECK_THROWS_AS(gad_trajectory(ClassLabel::Semigroup, {0.0, 0.0}, 1.0), ParameterError);
}

TEST_CASE("gad_rates agree with finite differences of (p, lambda)") {
    Rng rng(22);
    for (const auto label : {ClassLabel::Semigroup, ClassLabel::Markovian, ClassLabel::NonMarkovian}) {
        const ChannelSpec spec = sample_channel(ChannelFamily::Gad, label, rng);
        for (double t : {0.3, 1.1, 2.7}) {
            const double h = 1e-6;
            const GadParams a = gad_trajectory(label, spec.gad_coeffs, t - h);
            const GadParams b = gad_trajectory(label, spec.gad_coeffs, t + h);
            const GadParams mid = gad_trajectory(label, spec.gad_coeffs, t);
            const double dl = (b.lambda - a.lambda) / (2.0 * h);
            const auto r = gad_rates(label, spec.gad_coeffs, t);
            CHECK(std::abs(r[0] - mid.p * dl / (1.0 - mid.lambda)) < 1e-6);
            CHECK(std::abs(r[1] - (1.0 - mid.p) * dl / (1.0 - mid.lambda)) < 1e-6);
        }
    }
}

TEST_CASE("sign-rule oracle classifies every sampled spec correctly") {
    Rng rng(23);
    for (const auto family : {ChannelFamily::DephasingRB, ChannelFamily::Pauli,
                              ChannelFamily::PauliRB, ChannelFamily::Gad}) {
        for (const auto label :
             {ClassLabel::Semigroup, ClassLabel::Markovian, ClassLabel::NonMarkovian}) {
            for (int i = 0; i < 20; ++i) {
                const ChannelSpec spec = sample_channel(family, label, rng);
                CHECK(sign_rule_label(spec, 3.0) == label);
            }
        }
    }
}

TEST_CASE("rate_label classifies recovered rate series") {
    RateSeries constant;
    for (int i = 0; i < 10; ++i) {
        constant.times.push_back(0.1 * i);
        constant.rates.push_back({0.0, 0.0, 0.5});
    }
    CHECK(rate_label(constant) == ClassLabel::Semigroup);

    RateSeries varying = constant;
    for (std::size_t i = 0; i < varying.rates.size(); ++i) {
        varying.rates[i][2] = 0.5 + 0.1 * static_cast<double>(i);
    }
    CHECK(rate_label(varying) == ClassLabel::Markovian);

    RateSeries negative = constant;
    negative.rates[5][0] = -0.2;
    CHECK(rate_label(negative) == ClassLabel::NonMarkovian);
}

TEST_CASE("sampled Choi states satisfy the state invariants across the grid") {
    Rng rng(24);
    const std::vector<double> ts = {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    for (const auto family : kAllFamilies) {
        for (int i = 0; i < 15; ++i) {
            const auto label = markovnet::testing::random_label(rng);
            const ChannelSpec spec = sample_channel(family, label, rng);
            for (const auto& c : choi_series(spec, ts)) CHECK_NOTHROW(validate_choi(c));
        }
    }
}

TEST_CASE("family names round-trip") {
    for (const auto f : {ChannelFamily::Dephasing, ChannelFamily::DephasingRB, ChannelFamily::Pauli,
                         ChannelFamily::PauliRB, ChannelFamily::Gad}) {
        CHECK(family_from_string(to_string(f)) == f);
    }
    CHECK_THROWS_AS(family_from_string("qubit"), ParameterError);
}
