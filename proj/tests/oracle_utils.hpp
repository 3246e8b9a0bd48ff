#pragma once

#include <cmath>
#include <functional>

#include "markovnet/channel.hpp"
#include "markovnet/rng.hpp"

namespace markovnet::testing {

// Adaptive Simpson quadrature; independent oracle for the closed-form
// antiderivatives in rates.cpp.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int depth = 60) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    std::function<double(double, double, double, double, double, double, int)> recurse =
        [&](double lo, double hi, double flo, double fhi, double fmid, double eps,
            int level) -> double {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (level <= 0 || std::abs(left + right - whole) < 15.0 * eps) {
            return left + right + (left + right - whole) / 15.0;
        }
        return recurse(lo, mid, flo, fmid, flm, 0.5 * eps, level - 1) +
               recurse(mid, hi, fmid, fhi, frm, 0.5 * eps, level - 1);
    };
    if (a == b) return 0.0;
    return recurse(a, b, fa, fb, fm, tol, depth);
}

// Uniformly random valid spec of the given kind.
inline DecayRateSpec random_rate_spec(DecayRateKind kind, Rng& rng) {
    switch (kind) {
        case DecayRateKind::Constant: return {kind, rng.uniform(0.0, 2.0)};
        case DecayRateKind::TanhScaled: return {kind, rng.uniform(0.0, 1.0)};
        case DecayRateKind::SinSquared:
        case DecayRateKind::Sine: return {kind, rng.uniform(2.0, 4.0)};
        case DecayRateKind::NegTanh: return {kind, rng.uniform(1.0, 2.0)};
    }
    return {DecayRateKind::Constant, 0.0};
}

inline ClassLabel random_label(Rng& rng) { return static_cast<ClassLabel>(rng.below(3)); }

}  // namespace markovnet::testing
