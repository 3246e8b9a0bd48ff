#include "markovnet/liouville.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "markovnet/errors.hpp"

namespace markovnet {

namespace {

using Vector16c = Eigen::Matrix<std::complex<double>, 16, 1>;
using Matrix16c = Eigen::Matrix<std::complex<double>, 16, 16>;

Matrix4c kron2(const Matrix2c& a, const Matrix2c& b) {
    Matrix4c k;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return k;
}

// Row-major vectorization: vec(X)_{4i+j} = X(i,j); vec(AXB) = (A kron B^T) vec(X).
Matrix16c kron4(const Matrix4c& a, const Matrix4c& b) {
    Matrix16c k;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) k.block<4, 4>(4 * i, 4 * j) = a(i, j) * b;
    return k;
}

Vector16c vectorize(const Matrix4c& m) {
    Vector16c v;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) v(4 * i + j) = m(i, j);
    return v;
}

Matrix4c devectorize(const Vector16c& v) {
    Matrix4c m;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m(i, j) = v(4 * i + j);
    return m;
}

// Supermatrix of (L_A (x) id) on the vectorized Choi state, for a single
// jump operator A acting on the first qubit.
Matrix16c dissipator_supermatrix(const Matrix2c& op) {
    const Matrix2c id2 = Matrix2c::Identity();
    const Matrix4c b = kron2(op, id2);                  // A (x) I on the bipartite state
    const Matrix4c bdb = b.adjoint() * b;
    const Matrix4c id4 = Matrix4c::Identity();
    return kron4(b, b.conjugate()) - 0.5 * kron4(bdb, id4) - 0.5 * kron4(id4, bdb.transpose());
}

}  // namespace

std::vector<ChoiMatrix> evolve_choi_numerical(const std::vector<Matrix2c>& lindblad_ops,
                                              const std::vector<RateFn>& rates,
                                              const std::vector<double>& times,
                                              double step) {
    if (lindblad_ops.size() != rates.size()) {
        throw ParameterError("evolve_choi_numerical: ops and rates differ in length");
    }
    if (times.empty() || times.front() != 0.0) {
        throw ParameterError("evolve_choi_numerical: grid must start at 0");
    }
    std::vector<Matrix16c> generators;
    generators.reserve(lindblad_ops.size());
    for (const auto& op : lindblad_ops) generators.push_back(dissipator_supermatrix(op));

    auto apply = [&](double t, const Vector16c& v) {
        Vector16c out = Vector16c::Zero();
        for (std::size_t k = 0; k < generators.size(); ++k) out += rates[k](t) * (generators[k] * v);
        return out;
    };

    Vector16c state = vectorize(choi_identity());
    std::vector<ChoiMatrix> result;
    result.reserve(times.size());
    result.push_back(choi_identity());

    double t = 0.0;
    for (std::size_t g = 1; g < times.size(); ++g) {
        const double span = times[g] - t;
        if (span <= 0.0) throw ParameterError("evolve_choi_numerical: times must increase");
        const int n = std::max(1, static_cast<int>(std::lround(span / step)));
        const double h = span / n;
        for (int i = 0; i < n; ++i) {
            const Vector16c k1 = apply(t, state);
            const Vector16c k2 = apply(t + 0.5 * h, state + 0.5 * h * k1);
            const Vector16c k3 = apply(t + 0.5 * h, state + 0.5 * h * k2);
            const Vector16c k4 = apply(t + h, state + h * k3);
            state += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h;
        }
        t = times[g];
        ChoiMatrix c = devectorize(state);
        if (std::abs(c.trace().real() - 1.0) > 1e-8 || std::abs(c.trace().imag()) > 1e-8) {
            throw IntegrationError("trace drift exceeds 1e-8; reduce the step size");
        }
        result.push_back(c);
    }
    return result;
}

std::vector<ChoiMatrix> evolve_choi_numerical(const std::vector<Matrix2c>& lindblad_ops,
                                              const std::vector<DecayRateSpec>& rates,
                                              const std::vector<double>& times,
                                              double step) {
    std::vector<RateFn> fns;
    fns.reserve(rates.size());
    for (const auto& spec : rates) {
        validate(spec);
        fns.push_back([spec](double t) { return decay_rate(spec, t); });
    }
    return evolve_choi_numerical(lindblad_ops, fns, times, step);
}

Matrix4c choi_to_transfer(const ChoiMatrix& c) {
    Matrix4c t;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k)
                    t(2 * a + b, 2 * j + k) = 2.0 * c(2 * a + j, 2 * b + k);
    return t;
}

RateSeries recover_canonical_rates(const std::vector<ChoiMatrix>& series,
                                   const std::vector<double>& times) {
    if (series.size() != times.size()) {
        throw ParameterError("recover_canonical_rates: series/times length mismatch");
    }
    if (series.size() < 3) throw ParameterError("recover_canonical_rates: need at least 3 points");

    std::vector<Matrix4c> transfer(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) transfer[i] = choi_to_transfer(series[i]);

    // Orthonormal traceless basis G_i = sigma_i / sqrt(2). The superoperator
    // of rho -> G_i rho G_j is G_i (x) conj(G_j) under row-major
    // vectorization, and these 16 maps are Hilbert-Schmidt orthonormal, so
    // the decoherence matrix is read off by projection.
    std::array<Matrix2c, 3> basis;
    for (int k = 0; k < 3; ++k) basis[static_cast<std::size_t>(k)] = pauli(k + 1) / std::sqrt(2.0);

    RateSeries out;
    out.times.reserve(series.size() - 2);
    out.rates.reserve(series.size() - 2);
    for (std::size_t m = 1; m + 1 < series.size(); ++m) {
        const double dt_f = times[m + 1] - times[m];
        const double dt_b = times[m] - times[m - 1];
        if (std::abs(dt_f - dt_b) > 1e-9 * std::max(dt_f, dt_b)) {
            throw ParameterError("recover_canonical_rates: grid must be uniform");
        }
        const Matrix4c tdot = (transfer[m + 1] - transfer[m - 1]) / (dt_f + dt_b);

        Eigen::JacobiSVD<Matrix4c> svd(transfer[m]);
        const double cond = svd.singularValues()(0) / svd.singularValues()(3);
        if (!(cond < 1e12)) {
            throw NonInvertibleError("transfer matrix singular at t = " + std::to_string(times[m]));
        }
        const Matrix4c gen = tdot * transfer[m].inverse();

        Eigen::Matrix3cd decoherence;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const Matrix4c proj = kron2(basis[static_cast<std::size_t>(i)],
                                            basis[static_cast<std::size_t>(j)].conjugate());
                decoherence(i, j) = (proj.adjoint() * gen).trace();
            }
        }
        const double herm = (decoherence - Eigen::Matrix3cd(decoherence.adjoint())).cwiseAbs().maxCoeff();
        if (herm > 1e-6) {
            throw InconsistencyError("decoherence matrix non-Hermitian at t = " +
                                     std::to_string(times[m]));
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> solver(
            0.5 * (decoherence + Eigen::Matrix3cd(decoherence.adjoint())), Eigen::EigenvaluesOnly);
        std::array<double, 3> rates{solver.eigenvalues()(0), solver.eigenvalues()(1),
                                    solver.eigenvalues()(2)};
        out.times.push_back(times[m]);
        out.rates.push_back(rates);
    }
    return out;
}

}  // namespace markovnet
