#pragma once

#include <Eigen/Dense>

#include <complex>

namespace lrq {

using complexd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr complexd iu{0.0, 1.0};

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

inline Matrix anticommutator(const Matrix& a, const Matrix& b) { return a * b + b * a; }

// Frobenius norm of the anti-Hermitian part; 0 for exactly Hermitian input.
inline double hermiticity_defect(const Matrix& a) { return (a - a.adjoint()).norm(); }

/// exp(-i * scale * H) for Hermitian H, via eigendecomposition.
/// Unitary to machine precision for any dimension; uses the closed-form
/// solver for 2x2 and 3x3.
inline Matrix expm_i_hermitian(const Matrix& h, double scale) {
    Eigen::SelfAdjointEigenSolver<Matrix> es;
    if (h.rows() <= 3)
        es.computeDirect(h);
    else
        es.compute(h);
    const auto& u = es.eigenvectors();
    Vector phases(h.rows());
    for (Eigen::Index i = 0; i < h.rows(); ++i)
        phases[i] = std::exp(complexd(0.0, -scale * es.eigenvalues()[i]));
    return u * phases.asDiagonal() * u.adjoint();
}

/// exp(A) for anti-Hermitian A (A = -A^dagger). iA is Hermitian, so this
/// reuses the Hermitian path and the result is exactly unitary.
inline Matrix expm_antihermitian(const Matrix& a) { return expm_i_hermitian(iu * a, 1.0); }

} // namespace lrq
