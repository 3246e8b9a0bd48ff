#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>

namespace markovnet {

using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using ChoiMatrix = Matrix4c;  // computational-basis ordering |00>,|01>,|10>,|11>

// Bell components in the fixed order (phi+, phi-, psi+, psi-).
struct BellDiagonal {
    std::array<double, 4> components{};

    double& operator[](int i) { return components[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return components[static_cast<std::size_t>(i)]; }
};

// z-y-z Euler angles of the reference-frame rotation R = Rz(gamma)Ry(beta)Rz(alpha).
struct EulerAngles {
    double alpha = 0.0;  // [0, 2pi)
    double beta = 0.0;   // [0, pi]
    double gamma = 0.0;  // [0, 2pi)
};

// Generalized amplitude damping snapshot parameters.
struct GadParams {
    double p = 0.0;       // excitation balance, [0,1]
    double lambda = 0.0;  // damping, [0,1]
};

// Pauli matrices and the two-qubit Bell vectors (unit norm).
const Matrix2c& pauli(int k);  // k = 1,2,3 -> sigma_x, sigma_y, sigma_z
const Eigen::Vector4cd& bell_state(int i);  // i = 0..3 -> phi+, phi-, psi+, psi-

// |phi+><phi+|.
ChoiMatrix choi_identity();

// B_ij = <phi_i| C |phi_j>, the Choi matrix expressed in the Bell basis.
Matrix4c to_bell_basis(const ChoiMatrix& c);

// Diagonal Bell components of a Choi matrix.
BellDiagonal bell_diagonal(const ChoiMatrix& c);

// Choi state of dephasing along the Bloch axis (theta, varphi) with
// accumulated rate integral Gamma.
ChoiMatrix choi_dephasing_rb(double theta, double varphi, double gamma_integral);

// Bell-diagonal Choi state of the Pauli channel with accumulated integrals
// Gamma_1..Gamma_3 (jump operators sigma_x, sigma_y, sigma_z).
ChoiMatrix choi_pauli(double g1, double g2, double g3);

// SU(2) matrix of the z-y-z Euler rotation.
Matrix2c euler_rotation(const EulerAngles& angles);

// Choi state of the channel whose Lindblad operators are conjugated by R:
// (R (x) conj(R)) C (R (x) conj(R))^dagger.
ChoiMatrix rotate_choi(const ChoiMatrix& c, const EulerAngles& angles);
ChoiMatrix rotate_choi(const ChoiMatrix& c, const Matrix2c& rotation);

// Choi state of the GAD channel at parameters (p, lambda), derived from the
// channel's Kraus set / master equation. Bell diagonal is
// ((1+s)^2/4, (1-s)^2/4, lambda/4, lambda/4) with s = sqrt(1-lambda),
// independent of p; both Bell cross terms carry the factor (2p-1)lambda/4.
ChoiMatrix choi_gad(const GadParams& params);

// Largest Choi-invariant violation: max of |trace-1|, hermiticity defect and
// negative-eigenvalue excess. Helpers for validation and tests.
double trace_defect(const ChoiMatrix& c);
double hermiticity_defect(const ChoiMatrix& c);
double min_eigenvalue(const ChoiMatrix& c);

// Throws ValidationError unless trace within 1e-12, Hermitian within 1e-12
// and min eigenvalue >= -1e-10.
void validate_choi(const ChoiMatrix& c);

}  // namespace markovnet
