#include "markovnet/choi.hpp"

#include <cmath>

#include "markovnet/errors.hpp"

namespace markovnet {

namespace {
using namespace std::complex_literals;

Matrix2c make_sigma_x() {
    Matrix2c m;
    m << 0, 1, 1, 0;
    return m;
}
Matrix2c make_sigma_y() {
    Matrix2c m;
    m << 0, -1i, 1i, 0;
    return m;
}
Matrix2c make_sigma_z() {
    Matrix2c m;
    m << 1, 0, 0, -1;
    return m;
}

Eigen::Vector4cd make_bell(int i) {
    const double r = 1.0 / std::sqrt(2.0);
    Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
    switch (i) {
        case 0: v(0) = r; v(3) = r; break;   // phi+
        case 1: v(0) = r; v(3) = -r; break;  // phi-
        case 2: v(1) = r; v(2) = r; break;   // psi+
        case 3: v(1) = r; v(2) = -r; break;  // psi-
    }
    return v;
}

Matrix4c projector(int i) { return bell_state(i) * bell_state(i).adjoint(); }

Matrix4c cross(int i, int j) { return bell_state(i) * bell_state(j).adjoint(); }

}  // namespace

const Matrix2c& pauli(int k) {
    static const Matrix2c sx = make_sigma_x();
    static const Matrix2c sy = make_sigma_y();
    static const Matrix2c sz = make_sigma_z();
    switch (k) {
        case 1: return sx;
        case 2: return sy;
        case 3: return sz;
    }
    throw ParameterError("pauli index must be 1, 2 or 3");
}

const Eigen::Vector4cd& bell_state(int i) {
    static const std::array<Eigen::Vector4cd, 4> states = {make_bell(0), make_bell(1),
                                                           make_bell(2), make_bell(3)};
    if (i < 0 || i > 3) throw ParameterError("bell index must be 0..3");
    return states[static_cast<std::size_t>(i)];
}

ChoiMatrix choi_identity() { return projector(0); }

Matrix4c to_bell_basis(const ChoiMatrix& c) {
    Matrix4c u;  // columns are the Bell vectors
    for (int j = 0; j < 4; ++j) u.col(j) = bell_state(j);
    return u.adjoint() * c * u;
}

BellDiagonal bell_diagonal(const ChoiMatrix& c) {
    BellDiagonal d;
    for (int i = 0; i < 4; ++i) {
        d[i] = (bell_state(i).adjoint() * c * bell_state(i)).value().real();
    }
    return d;
}

ChoiMatrix choi_dephasing_rb(double theta, double varphi, double gamma_integral) {
    if (gamma_integral < 0.0) throw ParameterError("dephasing Gamma must be >= 0");
    const double e = std::exp(-gamma_integral);
    const double st = std::sin(theta), ct = std::cos(theta);
    const double sp = std::sin(varphi), cp = std::cos(varphi);

    Matrix4c c = 0.5 * (1.0 + e) * projector(0);
    Matrix4c rotated = ct * ct * projector(1) + st * st * cp * cp * projector(2) +
                       st * st * sp * sp * projector(3) +
                       st * ct * cp * (cross(1, 2) + cross(2, 1)) +
                       1i * st * ct * sp * (cross(1, 3) - cross(3, 1)) +
                       1i * st * st * sp * cp * (cross(2, 3) - cross(3, 2));
    c += 0.5 * (1.0 - e) * rotated;
    return c;
}

ChoiMatrix choi_pauli(double g1, double g2, double g3) {
    // A single Gamma_k may be negative (eternal scenario) as long as the
    // pairwise sums keep the weights nonnegative.
    const double e12 = std::exp(-g1 - g2);
    const double e13 = std::exp(-g1 - g3);
    const double e23 = std::exp(-g2 - g3);
    const double w0 = 0.25 * (1.0 + e12 + e13 + e23);
    const double w1 = 0.25 * (1.0 + e12 - e13 - e23);
    const double w2 = 0.25 * (1.0 - e12 - e13 + e23);
    const double w3 = 0.25 * (1.0 - e12 + e13 - e23);
    return w0 * projector(0) + w1 * projector(1) + w2 * projector(2) + w3 * projector(3);
}

Matrix2c euler_rotation(const EulerAngles& a) {
    auto rz = [](double psi) {
        Matrix2c m = Matrix2c::Zero();
        m(0, 0) = std::exp(-0.5i * psi);
        m(1, 1) = std::exp(0.5i * psi);
        return m;
    };
    auto ry = [](double psi) {
        Matrix2c m;
        m << std::cos(psi / 2), -std::sin(psi / 2), std::sin(psi / 2), std::cos(psi / 2);
        return m;
    };
    return rz(a.gamma) * ry(a.beta) * rz(a.alpha);
}

ChoiMatrix rotate_choi(const ChoiMatrix& c, const Matrix2c& rotation) {
    Matrix4c u = Matrix4c::Zero();
    const Matrix2c rbar = rotation.conjugate();
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y) u(2 * a + b, 2 * x + y) = rotation(a, x) * rbar(b, y);
    return u * c * u.adjoint();
}

ChoiMatrix rotate_choi(const ChoiMatrix& c, const EulerAngles& angles) {
    return rotate_choi(c, euler_rotation(angles));
}

ChoiMatrix choi_gad(const GadParams& params) {
    const double p = params.p, l = params.lambda;
    if (p < 0.0 || p > 1.0 || l < 0.0 || l > 1.0) {
        throw ParameterError("GAD parameters p, lambda must lie in [0,1]");
    }
    const double s = std::sqrt(1.0 - l);
    const double d0 = 0.25 * (1.0 + s) * (1.0 + s);
    const double d1 = 0.25 * (1.0 - s) * (1.0 - s);
    const double x = 0.25 * (2.0 * p - 1.0) * l;
    Matrix4c c = d0 * projector(0) + d1 * projector(1) + 0.25 * l * (projector(2) + projector(3));
    c += x * (cross(0, 1) + cross(1, 0));
    c += x * (cross(2, 3) + cross(3, 2));
    return c;
}

double trace_defect(const ChoiMatrix& c) { return std::abs(c.trace() - 1.0); }

double hermiticity_defect(const ChoiMatrix& c) {
    return (c - Matrix4c(c.adjoint())).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const ChoiMatrix& c) {
    Eigen::SelfAdjointEigenSolver<Matrix4c> solver(0.5 * (c + Matrix4c(c.adjoint())),
                                                   Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

void validate_choi(const ChoiMatrix& c) {
    if (trace_defect(c) > 1e-12) throw ValidationError("Choi trace deviates from 1");
    if (hermiticity_defect(c) > 1e-12) throw ValidationError("Choi matrix not Hermitian");
    if (min_eigenvalue(c) < -1e-10) throw ValidationError("Choi matrix not positive semidefinite");
}

}  // namespace markovnet
