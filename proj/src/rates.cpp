#include "markovnet/rates.hpp"

#include <cmath>

#include "markovnet/errors.hpp"

namespace markovnet {

void validate(const DecayRateSpec& spec) {
    const double a = spec.coeff;
    switch (spec.kind) {
        case DecayRateKind::Constant:
            // [0,2): semigroup draws live in [0,1), the eternal scenario's
            // constant companions in [1,2).
            if (a < 0.0 || a >= 2.0) throw ParameterError("Constant rate coefficient outside [0,2)");
            return;
        case DecayRateKind::TanhScaled:
            if (a < 0.0 || a >= 1.0) throw ParameterError("TanhScaled coefficient outside [0,1)");
            return;
        case DecayRateKind::SinSquared:
            if (a < 2.0 || a >= 4.0) throw ParameterError("SinSquared frequency outside [2,4)");
            return;
        case DecayRateKind::Sine:
            if (a < 2.0 || a >= 4.0) throw ParameterError("Sine frequency outside [2,4)");
            return;
        case DecayRateKind::NegTanh:
            if (a < 1.0) throw ParameterError("NegTanh coefficient must be >= 1");
            return;
    }
    throw ParameterError("unknown decay-rate kind");
}

double decay_rate(const DecayRateSpec& spec, double t) {
    switch (spec.kind) {
        case DecayRateKind::Constant: return spec.coeff;
        case DecayRateKind::TanhScaled: return spec.coeff * std::tanh(t);
        case DecayRateKind::SinSquared: {
            const double s = std::sin(spec.coeff * t);
            return s * s;
        }
        case DecayRateKind::Sine: return std::sin(spec.coeff * t);
        case DecayRateKind::NegTanh: return -spec.coeff * std::tanh(t);
    }
    throw ParameterError("unknown decay-rate kind");
}

double gamma_integral(const DecayRateSpec& spec, double t) {
    if (t < 0.0) throw ParameterError("gamma_integral requires t >= 0");
    validate(spec);
    const double a = spec.coeff;
    switch (spec.kind) {
        case DecayRateKind::Constant: return a * t;
        case DecayRateKind::TanhScaled: return a * std::log(std::cosh(t));
        case DecayRateKind::SinSquared: return 0.5 * t - std::sin(2.0 * a * t) / (4.0 * a);
        case DecayRateKind::Sine: return (1.0 - std::cos(a * t)) / a;
        case DecayRateKind::NegTanh: return -a * std::log(std::cosh(t));
    }
    throw ParameterError("unknown decay-rate kind");
}

std::string to_string(DecayRateKind kind) {
    switch (kind) {
        case DecayRateKind::Constant: return "constant";
        case DecayRateKind::TanhScaled: return "tanh";
        case DecayRateKind::SinSquared: return "sin2";
        case DecayRateKind::Sine: return "sine";
        case DecayRateKind::NegTanh: return "negtanh";
    }
    return "?";
}

DecayRateKind decay_rate_kind_from_string(const std::string& name) {
    if (name == "constant") return DecayRateKind::Constant;
    if (name == "tanh") return DecayRateKind::TanhScaled;
    if (name == "sin2") return DecayRateKind::SinSquared;
    if (name == "sine") return DecayRateKind::Sine;
    if (name == "negtanh") return DecayRateKind::NegTanh;
    throw ParameterError("unknown decay-rate kind: " + name);
}

}  // namespace markovnet
