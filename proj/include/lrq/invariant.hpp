#pragma once

#include "lrq/algebra.hpp"
#include "lrq/drive.hpp"
#include "lrq/errors.hpp"
#include "lrq/linalg.hpp"
#include "lrq/rk4.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace lrq {

// Lewis-Riesenfeld machinery: solve the auxiliary ODEs for the invariant
// angles (lambda, gamma), build I(t) and the diagonalizing unitary V(t),
// transform the Hamiltonian, and measure the invariant-equation residual
//   dI/dt - i [I, H]  ->  0,
// which is the canonical correctness test of the whole method.

/// Sampled invariant angles on a uniform grid over [0, T]. gamma is
/// accumulated continuously (never reduced mod 2pi mid-run); gamma_dot is
/// the ODE right-hand side evaluated at the accepted grid points.
struct InvariantTrajectory {
    double t_final = 0.0;
    int n_steps = 0;
    std::vector<double> t;
    std::vector<double> lambda;
    std::vector<double> gamma;
    std::vector<double> gamma_dot;

    double dt() const { return t_final / n_steps; }

    /// Grid index of time `tq`; throws if `tq` is not a grid point.
    int index_of(double tq) const {
        const double step = dt();
        const double x = tq / step;
        const int i = static_cast<int>(std::lround(x));
        if (i < 0 || i > n_steps || std::abs(x - i) > 1e-6)
            throw std::invalid_argument("time " + std::to_string(tq) + " is not on the trajectory grid");
        return i;
    }
};

struct AuxiliaryOptions {
    double lambda_floor = 1e-3; // fail fast this close to the poles of cot(lambda)
};

/// Subspace Hamiltonian at time t in the doublet basis:
///   H = omega N + (omega - delta)/2 sigma_z + g Q + g* Q^dag - omega/2.
inline Matrix jc_hamiltonian(const SubspaceRep& rep, const DriveParams& drive, double t) {
    const double w = drive.omega(t);
    const double d = drive.delta(t, rep.k);
    const complexd g = drive.g(t);
    return w * rep.N + 0.5 * (w - d) * rep.sigma_z + g * rep.Q + std::conj(g) * rep.Q_dag -
           0.5 * w * Matrix::Identity(2, 2);
}

/// Spin-model Hamiltonian c(t) . J in the given representation.
inline Matrix spin_hamiltonian(const SpinRep& rep, const SpinDrive& drive, double t) {
    const double c0 = drive.c0(t);
    const double th = drive.theta(t);
    const double ph = drive.phi(t);
    return c0 * (0.5 * std::sin(th) * std::exp(-iu * ph) * rep.J_plus +
                 0.5 * std::sin(th) * std::exp(iu * ph) * rep.J_minus +
                 std::cos(th) * rep.J3);
}

/// Full-Fock-space Hamiltonian (independent of the N-based subspace form;
/// used to cross-check the sub-Hilbert-space reduction).
inline Matrix fock_hamiltonian(const FockRep& rep, const DriveParams& drive, double t) {
    const int nf = rep.n_max + 1;
    const Matrix number = rep.a_dag * rep.a;
    Matrix h = Matrix::Zero(rep.dim(), rep.dim());
    h.topLeftCorner(nf, nf) = number;
    h.bottomRightCorner(nf, nf) = number;
    const complexd g = drive.g(t);
    return drive.omega(t) * h + 0.5 * drive.omega0(t) * rep.sigma_z_full + g * rep.Q_full +
           std::conj(g) * rep.Q_dag_full;
}

/// Invariant I(lambda, gamma) in the doublet basis. Its Bloch vector is the
/// unit vector (sin l cos g, sin l sin g, cos l), so the eigenvalues are
/// exactly +1 and -1 for any angles.
inline Matrix build_invariant(const SubspaceRep& rep, double lambda, double gamma) {
    const double s = std::sin(lambda) / std::sqrt(rep.lambda_m);
    return s * (std::exp(iu * gamma) * rep.Q + std::exp(-iu * gamma) * rep.Q_dag) +
           std::cos(lambda) * rep.sigma_z;
}

/// Diagonalizing unitary V = exp(alpha Q - alpha* Q^dag) with
/// alpha = (lambda/2) e^{i gamma} / sqrt(lambda_m). Satisfies
/// V^dag I V = sigma_z.
inline Matrix build_V(const SubspaceRep& rep, double lambda, double gamma) {
    const complexd alpha = 0.5 * lambda * std::exp(iu * gamma) / std::sqrt(rep.lambda_m);
    return expm_antihermitian(alpha * rep.Q - std::conj(alpha) * rep.Q_dag);
}

/// Spin-representation invariant n(lambda, gamma) . J.
inline Matrix spin_invariant(const SpinRep& rep, double lambda, double gamma) {
    return 0.5 * std::sin(lambda) * std::exp(-iu * gamma) * rep.J_plus +
           0.5 * std::sin(lambda) * std::exp(iu * gamma) * rep.J_minus +
           std::cos(lambda) * rep.J3;
}

/// Spin-representation unitary V = exp(beta J+ - beta* J-) with
/// beta = -(lambda/2) e^{-i gamma}. Satisfies V^dag (n . J) V = J3.
inline Matrix spin_V(const SpinRep& rep, double lambda, double gamma) {
    const complexd beta = -0.5 * lambda * std::exp(-iu * gamma);
    return expm_antihermitian(beta * rep.J_plus - std::conj(beta) * rep.J_minus);
}

namespace detail {

// Reduced auxiliary system shared by the Jaynes-Cummings and spin models:
//   lambda_dot = 2 sqrt(lambda_m) Im(g e^{-i gamma})
//   gamma_dot  = -delta - 2 sqrt(lambda_m) cot(lambda) Re(g e^{-i gamma})
// The spin model maps onto the same form with sqrt(lambda_m) g -> c0/2 sin(theta) e^{i phi}
// and -delta -> c0 cos(theta). Signs are fixed by requiring the invariant
// equation residual to vanish (see invariant_residual).
template <typename TransverseFn, typename AxialFn>
InvariantTrajectory solve_auxiliary(TransverseFn&& transverse, AxialFn&& axial, double lambda0,
                                    double gamma0, double t_final, int n_steps,
                                    const AuxiliaryOptions& opt) {
    if (!(t_final > 0.0)) throw std::invalid_argument("t_final must be positive");
    if (n_steps < 100) throw std::invalid_argument("n_steps must be >= 100");
    if (!(lambda0 > 0.0 && lambda0 < std::numbers::pi))
        throw std::domain_error("lambda0 must lie strictly inside (0, pi)");

    const double dt = t_final / n_steps;
    auto rhs = [&](double t, const Rk4State<2>& y) -> Rk4State<2> {
        const double l = y[0];
        if (l < opt.lambda_floor || l > std::numbers::pi - opt.lambda_floor) throw singularity_error(t, l);
        const complexd c = transverse(t); // complex transverse drive, rotated into the invariant frame
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()) || !std::isfinite(axial(t)))
            throw numerical_error("non-finite drive sample at t = " + std::to_string(t));
        const complexd rot = c * std::exp(-iu * y[1]);
        return {2.0 * rot.imag(), axial(t) - 2.0 * (std::cos(l) / std::sin(l)) * rot.real()};
    };

    InvariantTrajectory traj;
    traj.t_final = t_final;
    traj.n_steps = n_steps;
    traj.t.reserve(n_steps + 1);
    traj.lambda.reserve(n_steps + 1);
    traj.gamma.reserve(n_steps + 1);
    traj.gamma_dot.reserve(n_steps + 1);

    rk4_integrate<2>(rhs, Rk4State<2>{lambda0, gamma0}, 0.0, dt, n_steps,
                     [&](int, double t, const Rk4State<2>& y) {
                         traj.t.push_back(t);
                         traj.lambda.push_back(y[0]);
                         traj.gamma.push_back(y[1]);
                         traj.gamma_dot.push_back(rhs(t, y)[1]);
                     });
    return traj;
}

} // namespace detail

/// Integrate the reduced auxiliary system for the Jaynes-Cummings drive.
inline InvariantTrajectory solve_auxiliary_jc(const DriveParams& drive, const SubspaceRep& rep,
                                              double lambda0, double gamma0, double t_final,
                                              int n_steps, const AuxiliaryOptions& opt = {}) {
    const double root = std::sqrt(rep.lambda_m);
    return detail::solve_auxiliary(
        [&, root](double t) { return root * drive.g(t); },
        [&](double t) { return -drive.delta(t, rep.k); }, lambda0, gamma0, t_final, n_steps, opt);
}

/// Integrate the reduced auxiliary system for the spin drive.
inline InvariantTrajectory solve_auxiliary_spin(const SpinDrive& drive, double lambda0,
                                                double gamma0, double t_final, int n_steps,
                                                const AuxiliaryOptions& opt = {}) {
    return detail::solve_auxiliary(
        [&](double t) { return 0.5 * drive.c0(t) * std::sin(drive.theta(t)) * std::exp(iu * drive.phi(t)); },
        [&](double t) { return drive.c0(t) * std::cos(drive.theta(t)); }, lambda0, gamma0, t_final,
        n_steps, opt);
}

/// H_V = V^dag H V - i V^dag dV/dt on the common grid, with dV/dt by
/// centered differences (one-sided second order at the endpoints).
inline std::vector<Matrix> transform_hamiltonian(std::span<const Matrix> h_samples,
                                                 std::span<const Matrix> v_samples, double dt) {
    if (h_samples.size() != v_samples.size())
        throw std::invalid_argument("H and V sample series must share one grid");
    if (h_samples.size() < 3)
        throw std::invalid_argument("transform_hamiltonian needs at least 3 samples");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");

    const std::size_t n = h_samples.size();
    std::vector<Matrix> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        Matrix vdot;
        if (j == 0)
            vdot = (-3.0 * v_samples[0] + 4.0 * v_samples[1] - v_samples[2]) / (2.0 * dt);
        else if (j == n - 1)
            vdot = (3.0 * v_samples[n - 1] - 4.0 * v_samples[n - 2] + v_samples[n - 3]) / (2.0 * dt);
        else
            vdot = (v_samples[j + 1] - v_samples[j - 1]) / (2.0 * dt);
        out[j] = v_samples[j].adjoint() * h_samples[j] * v_samples[j] -
                 iu * (v_samples[j].adjoint() * vdot);
    }
    return out;
}

/// Max over interior grid points of || dI/dt - i [I, H] ||_F with dI/dt by
/// centered differences. Zero (up to discretization) iff I(t) built from the
/// trajectory is an invariant of the drive Hamiltonian.
inline double invariant_residual(const InvariantTrajectory& traj, const DriveParams& drive,
                                 const SubspaceRep& rep) {
    if (traj.n_steps < 2) throw std::invalid_argument("trajectory too short for a residual");
    const double dt = traj.dt();
    double worst = 0.0;
    Matrix prev = build_invariant(rep, traj.lambda[0], traj.gamma[0]);
    Matrix cur = build_invariant(rep, traj.lambda[1], traj.gamma[1]);
    for (int j = 1; j < traj.n_steps; ++j) {
        Matrix next = build_invariant(rep, traj.lambda[j + 1], traj.gamma[j + 1]);
        const Matrix didt = (next - prev) / (2.0 * dt);
        const Matrix h = jc_hamiltonian(rep, drive, traj.t[j]);
        worst = std::max(worst, (didt - iu * commutator(cur, h)).norm());
        prev = std::move(cur);
        cur = std::move(next);
    }
    return worst;
}

/// Spin-model counterpart of invariant_residual.
inline double spin_invariant_residual(const InvariantTrajectory& traj, const SpinDrive& drive,
                                      const SpinRep& rep) {
    if (traj.n_steps < 2) throw std::invalid_argument("trajectory too short for a residual");
    const double dt = traj.dt();
    double worst = 0.0;
    Matrix prev = spin_invariant(rep, traj.lambda[0], traj.gamma[0]);
    Matrix cur = spin_invariant(rep, traj.lambda[1], traj.gamma[1]);
    for (int j = 1; j < traj.n_steps; ++j) {
        Matrix next = spin_invariant(rep, traj.lambda[j + 1], traj.gamma[j + 1]);
        const Matrix didt = (next - prev) / (2.0 * dt);
        const Matrix h = spin_hamiltonian(rep, drive, traj.t[j]);
        worst = std::max(worst, (didt - iu * commutator(cur, h)).norm());
        prev = std::move(cur);
        cur = std::move(next);
    }
    return worst;
}

} // namespace lrq
