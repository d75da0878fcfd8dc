#pragma once

#include "lrq/algebra.hpp"
#include "lrq/drive.hpp"
#include "lrq/invariant.hpp"
#include "lrq/linalg.hpp"
#include "lrq/phase.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace lrq {

// Brute-force reference propagator: the Schroedinger equation integrated as
// a time-ordered product of short-step exponentials. Deliberately never
// touches V(t), lambda(t) or gamma(t), so it is an oracle that is strictly
// independent of the invariant method under test.

using StateVector = Vector;

/// |<a|b>|^2 normalized; phase-blind by construction.
inline double fidelity(const StateVector& a, const StateVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("fidelity: dimension mismatch");
    const double na = a.squaredNorm();
    const double nb = b.squaredNorm();
    if (na == 0.0 || nb == 0.0) throw std::domain_error("fidelity of a zero vector");
    return std::norm(a.dot(b)) / (na * nb);
}

/// Evolve psi0 over [0, T] by n_steps midpoint-sampled step exponentials
///   psi_{j+1} = exp(-i H(t_j + dt/2) dt) psi_j,
/// second-order accurate. Each H sample must be Hermitian; each step matrix
/// is unitary to machine precision, and no renormalization is applied, so
/// norm drift stays a visible diagnostic. `observe(j+1, t_{j+1}, psi)` is
/// called after every step.
template <typename HFn, typename Observer>
StateVector evolve_timestepped(HFn&& h_at, StateVector psi, double t_final, int n_steps,
                               Observer&& observe) {
    if (n_steps < 1000) throw std::invalid_argument("oracle n_steps must be >= 1000");
    if (!(t_final > 0.0)) throw std::invalid_argument("t_final must be positive");
    const double dt = t_final / n_steps;
    for (int j = 0; j < n_steps; ++j) {
        const Matrix h = h_at(j * dt + 0.5 * dt);
        if (h.rows() != h.cols() || h.rows() != psi.size())
            throw std::invalid_argument("H sample dimension does not match the state");
        if (hermiticity_defect(h) > 1e-10)
            throw std::invalid_argument("non-Hermitian H sample at t = " +
                                        std::to_string(j * dt + 0.5 * dt));
        psi = expm_i_hermitian(h, dt) * psi;
        observe(j + 1, (j + 1) * dt, psi);
    }
    return psi;
}

template <typename HFn>
StateVector evolve_timestepped(HFn&& h_at, StateVector psi, double t_final, int n_steps) {
    return evolve_timestepped(static_cast<HFn&&>(h_at), std::move(psi), t_final, n_steps,
                              [](int, double, const StateVector&) {});
}

/// sigma_z eigenvector of the branch in the doublet basis.
inline StateVector branch_basis_vector(int sigma) {
    StateVector e = StateVector::Zero(2);
    if (sigma == +1)
        e[0] = 1.0;
    else if (sigma == -1)
        e[1] = 1.0;
    else
        throw std::domain_error("branch sigma must be +1 or -1");
    return e;
}

/// Closed-form branch solution e^{-i(phi_d + phi_g)} V(t) e_sigma at a
/// trajectory grid point (no interpolation of V off the grid).
inline StateVector exact_solution_jc(const InvariantTrajectory& traj, const DriveParams& drive,
                                     const SubspaceRep& rep, int sigma, double t) {
    const int j = traj.index_of(t);
    const PhaseSeries phases = jc_phase_series(traj, drive, rep.m, rep.k, sigma);
    const Matrix v = build_V(rep, traj.lambda[j], traj.gamma[j]);
    return std::exp(-iu * phases.total_at(j)) * (v * branch_basis_vector(sigma));
}

struct BranchSample {
    double t = 0.0;
    double fidelity_value = 1.0;
    double phase_offset = 0.0; // arg<psi_exact | psi_numeric> at this time
};

struct BranchReport {
    int sigma = +1;
    double min_fidelity = 1.0;
    double phase_offset = 0.0;    // arg<psi_exact|psi_numeric> at T
    double measured_phase = 0.0;  // -arg<V(T) e_sigma | psi_numeric(T)>
    double formula_phase = 0.0;   // phi_d + phi_g from the verbatim integrands
    double max_norm_drift = 0.0;  // max | ||psi|| - 1 | over the run
    double max_invariant_expectation_error = 0.0; // max_t |<psi|I(t)|psi> - sigma|
    std::vector<BranchSample> samples;            // at ten evenly spaced checkpoints
};

/// Brute-force one branch from psi0 = V(0) e_sigma and compare against the
/// closed form at every trajectory grid point. oracle_steps must be a
/// multiple of the trajectory step count so the grids align.
inline BranchReport compare_branch(const InvariantTrajectory& traj, const DriveParams& drive,
                                   const SubspaceRep& rep, int sigma, int oracle_steps) {
    if (oracle_steps % traj.n_steps != 0)
        throw std::invalid_argument("oracle_steps must be a multiple of the trajectory n_steps");
    const int ratio = oracle_steps / traj.n_steps;
    const PhaseSeries phases = jc_phase_series(traj, drive, rep.m, rep.k, sigma);
    const StateVector e = branch_basis_vector(sigma);

    BranchReport report;
    report.sigma = sigma;
    report.formula_phase = phases.total_at(traj.n_steps);

    const int decade = std::max(1, traj.n_steps / 10);
    auto h_at = [&](double t) { return jc_hamiltonian(rep, drive, t); };

    StateVector psi0 = build_V(rep, traj.lambda[0], traj.gamma[0]) * e;
    evolve_timestepped(
        h_at, psi0, traj.t_final, oracle_steps, [&](int step, double, const StateVector& psi) {
            report.max_norm_drift = std::max(report.max_norm_drift, std::abs(psi.norm() - 1.0));
            if (step % ratio != 0) return;
            const int j = step / ratio;
            const Matrix v = build_V(rep, traj.lambda[j], traj.gamma[j]);
            const StateVector frame = v * e;
            const StateVector exact = std::exp(-iu * phases.total_at(j)) * frame;
            report.min_fidelity = std::min(report.min_fidelity, fidelity(exact, psi));
            const Matrix inv = build_invariant(rep, traj.lambda[j], traj.gamma[j]);
            const double expectation = std::real(psi.dot(inv * psi)) / psi.squaredNorm();
            report.max_invariant_expectation_error =
                std::max(report.max_invariant_expectation_error, std::abs(expectation - sigma));
            if (j % decade == 0)
                report.samples.push_back({traj.t[j], fidelity(exact, psi),
                                          std::arg(exact.dot(psi))});
            if (j == traj.n_steps) {
                report.phase_offset = std::arg(exact.dot(psi));
                report.measured_phase = -std::arg(frame.dot(psi));
            }
        });
    return report;
}

} // namespace lrq
