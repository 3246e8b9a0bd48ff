#pragma once

#include <string>

namespace markovnet {

// Decay-rate function families used to generate channel instances.
//   Constant   gamma(t) = a
//   TanhScaled gamma(t) = a*tanh(t)
//   SinSquared gamma(t) = sin^2(b*t)
//   Sine       gamma(t) = sin(b*t)
//   NegTanh    gamma(t) = -a*tanh(t)   (eternal scenario companion)
enum class DecayRateKind { Constant, TanhScaled, SinSquared, Sine, NegTanh };

struct DecayRateSpec {
    DecayRateKind kind = DecayRateKind::Constant;
    double coeff = 0.0;
};

// Throws ParameterError if coeff is outside the kind's admissible range:
// Constant in [0,2), TanhScaled in [0,1), SinSquared/Sine in [2,4),
// NegTanh >= 1.
void validate(const DecayRateSpec& spec);

// gamma(t) for the spec's function family.
double decay_rate(const DecayRateSpec& spec, double t);

// Gamma(t) = integral of gamma over [0,t], in closed form.
double gamma_integral(const DecayRateSpec& spec, double t);

std::string to_string(DecayRateKind kind);
DecayRateKind decay_rate_kind_from_string(const std::string& name);

}  // namespace markovnet
