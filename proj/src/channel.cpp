#include "markovnet/channel.hpp"

#include <algorithm>
#include <cmath>

#include "markovnet/errors.hpp"

namespace markovnet {

namespace {

constexpr double kPi = 3.14159265358979323846;

DecayRateSpec sample_semigroup_rate(Rng& rng) {
    return {DecayRateKind::Constant, rng.uniform(0.0, 1.0)};
}

DecayRateSpec sample_markovian_rate(Rng& rng) {
    if (rng.below(2) == 0) return {DecayRateKind::TanhScaled, rng.uniform(0.0, 1.0)};
    return {DecayRateKind::SinSquared, rng.uniform(2.0, 4.0)};
}

Matrix2c dephasing_axis_op(double theta, double varphi) {
    const double nx = std::sin(theta) * std::cos(varphi);
    const double ny = std::sin(theta) * std::sin(varphi);
    const double nz = std::cos(theta);
    return nx * pauli(1) + ny * pauli(2) + nz * pauli(3);
}

}  // namespace

std::string to_string(ClassLabel label) {
    switch (label) {
        case ClassLabel::Semigroup: return "semigroup";
        case ClassLabel::Markovian: return "markovian";
        case ClassLabel::NonMarkovian: return "nonmarkovian";
    }
    return "?";
}

std::string to_string(ChannelFamily family) {
    switch (family) {
        case ChannelFamily::Dephasing: return "dephasing";
        case ChannelFamily::DephasingRB: return "dephasing_rb";
        case ChannelFamily::Pauli: return "pauli";
        case ChannelFamily::PauliRB: return "pauli_rb";
        case ChannelFamily::Gad: return "gad";
    }
    return "?";
}

ChannelFamily family_from_string(const std::string& name) {
    if (name == "dephasing") return ChannelFamily::Dephasing;
    if (name == "dephasing_rb") return ChannelFamily::DephasingRB;
    if (name == "pauli") return ChannelFamily::Pauli;
    if (name == "pauli_rb") return ChannelFamily::PauliRB;
    if (name == "gad") return ChannelFamily::Gad;
    throw ParameterError("unknown channel family: " + name);
}

ChannelSpec sample_channel(ChannelFamily family, ClassLabel label, Rng& rng) {
    ChannelSpec spec;
    spec.family = family;
    spec.label = label;

    switch (family) {
        case ChannelFamily::Dephasing:
        case ChannelFamily::DephasingRB: {
            if (family == ChannelFamily::DephasingRB) {
                spec.theta = std::acos(rng.uniform(-1.0, 1.0));
                spec.varphi = rng.uniform(0.0, 2.0 * kPi);
            }
            switch (label) {
                case ClassLabel::Semigroup: spec.rates.push_back(sample_semigroup_rate(rng)); break;
                case ClassLabel::Markovian: spec.rates.push_back(sample_markovian_rate(rng)); break;
                case ClassLabel::NonMarkovian:
                    spec.rates.push_back({DecayRateKind::Sine, rng.uniform(2.0, 4.0)});
                    break;
            }
            return spec;
        }
        case ChannelFamily::Pauli:
        case ChannelFamily::PauliRB: {
            if (family == ChannelFamily::PauliRB) {
                spec.euler.alpha = rng.uniform(0.0, 2.0 * kPi);
                spec.euler.beta = rng.uniform(0.0, kPi);
                spec.euler.gamma = rng.uniform(0.0, 2.0 * kPi);
            }
            switch (label) {
                case ClassLabel::Semigroup:
                    for (int k = 0; k < 3; ++k) spec.rates.push_back(sample_semigroup_rate(rng));
                    break;
                case ClassLabel::Markovian:
                    for (int k = 0; k < 3; ++k) spec.rates.push_back(sample_markovian_rate(rng));
                    break;
                case ClassLabel::NonMarkovian: {
                    if (rng.below(2) == 0) {
                        for (int k = 0; k < 3; ++k)
                            spec.rates.push_back({DecayRateKind::Sine, rng.uniform(2.0, 4.0)});
                    } else {
                        // Eternal scenario: two equal positive constants and
                        // one -a*tanh(t), a >= 1.
                        const double a = rng.uniform(1.0, 2.0);
                        const auto neg = rng.below(3);
                        for (std::uint64_t k = 0; k < 3; ++k) {
                            if (k == neg) spec.rates.push_back({DecayRateKind::NegTanh, a});
                            else spec.rates.push_back({DecayRateKind::Constant, a});
                        }
                    }
                    break;
                }
            }
            return spec;
        }
        case ChannelFamily::Gad: {
            switch (label) {
                case ClassLabel::Semigroup: {
                    double g1 = 0.0, g2 = 0.0;
                    do {
                        g1 = rng.uniform(0.0, 1.0);
                        g2 = rng.uniform(0.0, 1.0);
                    } while (g1 + g2 < 1e-3);
                    spec.gad_coeffs = {g1, g2};
                    break;
                }
                case ClassLabel::Markovian:
                    spec.gad_coeffs = {rng.uniform(0.0, 1.0), rng.uniform(0.5, 1.0)};
                    break;
                case ClassLabel::NonMarkovian:
                    spec.gad_coeffs = {rng.uniform(0.0, 1.0), rng.uniform(2.0, 4.0)};
                    break;
            }
            return spec;
        }
    }
    throw ParameterError("unknown channel family");
}

GadParams gad_trajectory(ClassLabel label, const std::array<double, 2>& coeffs, double t) {
    switch (label) {
        case ClassLabel::Semigroup: {
            const double g1 = coeffs[0], g2 = coeffs[1];
            if (g1 < 0.0 || g2 < 0.0 || g1 + g2 <= 0.0) {
                throw ParameterError("GAD semigroup rates must be nonnegative with positive sum");
            }
            return {g1 / (g1 + g2), 1.0 - std::exp(-(g1 + g2) * t)};
        }
        case ClassLabel::Markovian: {
            const double p = coeffs[0], b = coeffs[1];
            if (p < 0.0 || p > 1.0) throw ParameterError("GAD p outside [0,1]");
            if (b < 0.5 || b >= 1.0) throw ParameterError("GAD Markovian b outside [1/2,1)");
            return {p, std::tanh(b * t)};
        }
        case ClassLabel::NonMarkovian: {
            const double p = coeffs[0], b = coeffs[1];
            if (p < 0.0 || p > 1.0) throw ParameterError("GAD p outside [0,1]");
            if (b < 2.0 || b >= 4.0) throw ParameterError("GAD non-Markovian b outside [2,4)");
            const double s = std::sin(b * t);
            return {p, 0.5 * s * s};
        }
    }
    throw ParameterError("unknown class label");
}

std::array<double, 2> gad_rates(ClassLabel label, const std::array<double, 2>& coeffs, double t) {
    // gamma1 = lambda*dp/dt + p*dlambda/dt/(1-lambda) with constant p, and
    // symmetrically for gamma2 with q = 1-p.
    switch (label) {
        case ClassLabel::Semigroup: return {coeffs[0], coeffs[1]};
        case ClassLabel::Markovian: {
            const double p = coeffs[0], b = coeffs[1];
            const double lam = std::tanh(b * t);
            const double common = b * (1.0 + lam);  // b(1-lam^2)/(1-lam)
            return {p * common, (1.0 - p) * common};
        }
        case ClassLabel::NonMarkovian: {
            const double p = coeffs[0], b = coeffs[1];
            const double s = std::sin(b * t);
            const double lam = 0.5 * s * s;
            const double dlam = 0.5 * b * std::sin(2.0 * b * t);
            const double common = dlam / (1.0 - lam);
            return {p * common, (1.0 - p) * common};
        }
    }
    throw ParameterError("unknown class label");
}

ChoiMatrix choi_at(const ChannelSpec& spec, double t) {
    switch (spec.family) {
        case ChannelFamily::Dephasing:
        case ChannelFamily::DephasingRB:
            return choi_dephasing_rb(spec.theta, spec.varphi, gamma_integral(spec.rates.at(0), t));
        case ChannelFamily::Pauli:
        case ChannelFamily::PauliRB: {
            const ChoiMatrix c = choi_pauli(gamma_integral(spec.rates.at(0), t),
                                            gamma_integral(spec.rates.at(1), t),
                                            gamma_integral(spec.rates.at(2), t));
            return spec.family == ChannelFamily::PauliRB ? rotate_choi(c, spec.euler) : c;
        }
        case ChannelFamily::Gad:
            return choi_gad(gad_trajectory(spec.label, spec.gad_coeffs, t));
    }
    throw ParameterError("unknown channel family");
}

std::vector<ChoiMatrix> choi_series(const ChannelSpec& spec, const std::vector<double>& times) {
    std::vector<ChoiMatrix> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(choi_at(spec, t));
    return out;
}

GeneratorModel oracle_model(const ChannelSpec& spec) {
    GeneratorModel model;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    switch (spec.family) {
        case ChannelFamily::Dephasing:
        case ChannelFamily::DephasingRB: {
            model.ops.push_back(inv_sqrt2 * dephasing_axis_op(spec.theta, spec.varphi));
            const DecayRateSpec r = spec.rates.at(0);
            model.rates.push_back([r](double t) { return decay_rate(r, t); });
            return model;
        }
        case ChannelFamily::Pauli:
        case ChannelFamily::PauliRB: {
            const Matrix2c rot = spec.family == ChannelFamily::PauliRB
                                     ? euler_rotation(spec.euler)
                                     : Matrix2c(Matrix2c::Identity());
            for (int k = 0; k < 3; ++k) {
                model.ops.push_back(inv_sqrt2 * (rot * pauli(k + 1) * rot.adjoint()));
                const DecayRateSpec r = spec.rates.at(static_cast<std::size_t>(k));
                model.rates.push_back([r](double t) { return decay_rate(r, t); });
            }
            return model;
        }
        case ChannelFamily::Gad: {
            Matrix2c lower = Matrix2c::Zero(), raise = Matrix2c::Zero();
            lower(0, 1) = 1.0;  // sigma-
            raise(1, 0) = 1.0;  // sigma+
            model.ops = {lower, raise};
            const ClassLabel label = spec.label;
            const auto coeffs = spec.gad_coeffs;
            model.rates.push_back([label, coeffs](double t) { return gad_rates(label, coeffs, t)[0]; });
            model.rates.push_back([label, coeffs](double t) { return gad_rates(label, coeffs, t)[1]; });
            return model;
        }
    }
    throw ParameterError("unknown channel family");
}

ClassLabel sign_rule_label(const ChannelSpec& spec, double horizon, double dt) {
    const auto n = static_cast<std::size_t>(std::lround(horizon / dt));
    if (spec.family == ChannelFamily::Gad) {
        double min_rate = 0.0, max_spread = 0.0;
        std::array<double, 2> first = gad_rates(spec.label, spec.gad_coeffs, 0.0);
        std::array<double, 2> lo = first, hi = first;
        for (std::size_t i = 0; i <= n; ++i) {
            const auto r = gad_rates(spec.label, spec.gad_coeffs, static_cast<double>(i) * dt);
            for (int k = 0; k < 2; ++k) {
                min_rate = std::min(min_rate, r[static_cast<std::size_t>(k)]);
                lo[static_cast<std::size_t>(k)] = std::min(lo[static_cast<std::size_t>(k)], r[static_cast<std::size_t>(k)]);
                hi[static_cast<std::size_t>(k)] = std::max(hi[static_cast<std::size_t>(k)], r[static_cast<std::size_t>(k)]);
            }
        }
        for (int k = 0; k < 2; ++k) {
            max_spread = std::max(max_spread, hi[static_cast<std::size_t>(k)] - lo[static_cast<std::size_t>(k)]);
        }
        if (min_rate < -1e-12) return ClassLabel::NonMarkovian;
        if (max_spread < 1e-12) return ClassLabel::Semigroup;
        return ClassLabel::Markovian;
    }

    bool all_constant = true;
    double min_rate = 0.0;
    for (const auto& r : spec.rates) {
        if (r.kind != DecayRateKind::Constant) all_constant = false;
        for (std::size_t i = 0; i <= n; ++i) {
            min_rate = std::min(min_rate, decay_rate(r, static_cast<double>(i) * dt));
        }
    }
    if (min_rate < -1e-12) return ClassLabel::NonMarkovian;
    return all_constant ? ClassLabel::Semigroup : ClassLabel::Markovian;
}

ClassLabel rate_label(const RateSeries& series, double neg_tol, double const_tol) {
    if (series.rates.empty()) throw ParameterError("rate_label: empty series");
    std::array<double, 3> lo = series.rates.front(), hi = series.rates.front();
    double min_rate = 0.0;
    for (const auto& r : series.rates) {
        for (std::size_t k = 0; k < 3; ++k) {
            min_rate = std::min(min_rate, r[k]);
            lo[k] = std::min(lo[k], r[k]);
            hi[k] = std::max(hi[k], r[k]);
        }
    }
    if (min_rate < -neg_tol) return ClassLabel::NonMarkovian;
    double spread = 0.0;
    for (std::size_t k = 0; k < 3; ++k) spread = std::max(spread, hi[k] - lo[k]);
    return spread < const_tol ? ClassLabel::Semigroup : ClassLabel::Markovian;
}

}  // namespace markovnet
