#pragma once

#include <functional>
#include <vector>

#include "markovnet/choi.hpp"
#include "markovnet/rates.hpp"

namespace markovnet {

using RateFn = std::function<double(double)>;

// Time series of up to three canonical decay rates recovered from channel
// snapshots. rates[i] holds the eigenvalues of the decoherence matrix at
// times[i], sorted ascending.
struct RateSeries {
    std::vector<double> times;
    std::vector<std::array<double, 3>> rates;
};

// Integrates dC/dt = (L(t) (x) id)[C] from C(0) = |phi+><phi+| with
// fixed-step RK4 (step ~1e-3) and returns C at each requested grid time.
// L(t)[rho] = sum_k rate_k(t) (A_k rho A_k^dag - 1/2 {A_k^dag A_k, rho}).
// The rates are applied exactly as given; dephasing/Pauli callers pass
// A_k = sigma_k / sqrt(2) so that gamma_k enters as gamma_k/2 L_{sigma_k}.
// Throws IntegrationError if the trace drifts by more than 1e-8.
std::vector<ChoiMatrix> evolve_choi_numerical(const std::vector<Matrix2c>& lindblad_ops,
                                              const std::vector<RateFn>& rates,
                                              const std::vector<double>& times,
                                              double step = 1e-3);

// DecayRateSpec convenience overload.
std::vector<ChoiMatrix> evolve_choi_numerical(const std::vector<Matrix2c>& lindblad_ops,
                                              const std::vector<DecayRateSpec>& rates,
                                              const std::vector<double>& times,
                                              double step = 1e-3);

// Row-major-vectorization transfer matrix T with T[(ab),(jk)] = 2 C[(aj),(bk)],
// i.e. Lambda(rho) acting on vec(rho).
Matrix4c choi_to_transfer(const ChoiMatrix& c);

// Recovers the canonical decay rates from a Choi time series: builds the
// transfer matrix T(t), forms the generator L = dT/dt T^{-1} by central
// differences at interior points, projects its dissipative part onto the
// orthonormal Pauli basis {sigma_k/sqrt(2)} and returns the eigenvalues of
// the resulting 3x3 decoherence matrix. Endpoints are dropped.
// Throws NonInvertibleError (cond(T) > 1e12) or InconsistencyError
// (decoherence matrix non-Hermitian beyond 1e-6).
RateSeries recover_canonical_rates(const std::vector<ChoiMatrix>& series,
                                   const std::vector<double>& times);

}  // namespace markovnet
