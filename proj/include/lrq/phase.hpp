#pragma once

#include "lrq/algebra.hpp"
#include "lrq/drive.hpp"
#include "lrq/invariant.hpp"
#include "lrq/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace lrq {

// Dynamical and geometric phase integrals along a solved invariant
// trajectory, plus the closed-form cyclic solid-angle phase. The integrand
// formulas are kept verbatim for both sigma branches; any systematic offset
// they produce against the brute-force propagator is reported by the oracle
// module, never silently corrected here.

/// Accumulated phases for one invariant branch sigma (the I_V eigenvalue).
struct PhaseRecord {
    int sigma = +1;
    double phi_d = 0.0;
    double phi_g = 0.0;
    double phi_total = 0.0; // always phi_d + phi_g as stored
};

/// Cumulative phase series on the trajectory grid (for CSV export and for
/// evaluating the closed-form solution at interior times).
struct PhaseSeries {
    int sigma = +1;
    std::vector<double> t;
    std::vector<double> phi_d;
    std::vector<double> phi_g;

    PhaseRecord record() const {
        PhaseRecord r;
        r.sigma = sigma;
        r.phi_d = phi_d.back();
        r.phi_g = phi_g.back();
        r.phi_total = r.phi_d + r.phi_g;
        return r;
    }
    double total_at(int j) const { return phi_d[j] + phi_g[j]; }
};

namespace detail {

inline void require_branch(int sigma) {
    if (sigma != +1 && sigma != -1) throw std::domain_error("branch sigma must be +1 or -1");
}

} // namespace detail

/// Phase-rate integrands for the multiphoton Jaynes-Cummings branches:
///   phi_d_dot = (m + k/2) omega + (sigma/2) sqrt(lambda_m) 2 Re(g e^{-i gamma}) sin l
///               ... with the sigma = -1 rate carried verbatim as printed in
///               the source formulas: its coupling term keeps the + sign and
///               the detuning term flips to +delta/2 cos l.
///   phi_g_dot = sigma (gamma_dot / 2)(1 - cos l)
inline PhaseSeries jc_phase_series(const InvariantTrajectory& traj, const DriveParams& drive,
                                   int m, int k, int sigma) {
    detail::require_branch(sigma);
    const double root = std::sqrt(static_cast<double>(factorial_ratio(m, k)));
    const std::size_t n = traj.t.size();
    std::vector<double> fd(n), fg(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = traj.t[j];
        const double l = traj.lambda[j];
        const double coupling =
            0.5 * root * 2.0 * std::real(drive.g(t) * std::exp(-iu * traj.gamma[j])) * std::sin(l);
        const double detuning = 0.5 * drive.delta(t, k) * std::cos(l);
        fd[j] = (m + 0.5 * k) * drive.omega(t) + coupling - sigma * detuning;
        fg[j] = sigma * 0.5 * traj.gamma_dot[j] * (1.0 - std::cos(l));
    }
    PhaseSeries s;
    s.sigma = sigma;
    s.t = traj.t;
    s.phi_d = cumulative_simpson(fd, traj.dt());
    s.phi_g = cumulative_simpson(fg, traj.dt());
    return s;
}

inline PhaseRecord jc_phase(const InvariantTrajectory& traj, const DriveParams& drive, int m,
                            int k, int sigma) {
    return jc_phase_series(traj, drive, m, k, sigma).record();
}

/// Spin-model phases for the J3 eigenvalue m:
///   phi_d = m int c0 [cos l cos th + sin l sin th cos(gamma - phi)] dt
///   phi_g = m int gamma_dot (1 - cos l) dt
inline PhaseSeries spin_phase_series(const InvariantTrajectory& traj, const SpinDrive& drive,
                                     double m_eigenvalue) {
    const std::size_t n = traj.t.size();
    std::vector<double> fd(n), fg(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = traj.t[j];
        const double l = traj.lambda[j];
        fd[j] = m_eigenvalue * drive.c0(t) *
                (std::cos(l) * std::cos(drive.theta(t)) +
                 std::sin(l) * std::sin(drive.theta(t)) * std::cos(traj.gamma[j] - drive.phi(t)));
        fg[j] = m_eigenvalue * traj.gamma_dot[j] * (1.0 - std::cos(l));
    }
    PhaseSeries s;
    s.sigma = m_eigenvalue > 0 ? +1 : (m_eigenvalue < 0 ? -1 : 0);
    s.t = traj.t;
    s.phi_d = cumulative_simpson(fd, traj.dt());
    s.phi_g = cumulative_simpson(fg, traj.dt());
    return s;
}

inline PhaseRecord spin_phase(const InvariantTrajectory& traj, const SpinDrive& drive,
                              double m_eigenvalue) {
    auto s = spin_phase_series(traj, drive, m_eigenvalue);
    PhaseRecord r = s.record();
    r.sigma = m_eigenvalue > 0 ? +1 : (m_eigenvalue < 0 ? -1 : 0);
    return r;
}

/// Solid angle of the cone of half-angle lambda: 2 pi (1 - cos lambda).
/// Equals the per-revolution geometric phase magnitude at constant lambda.
inline double cyclic_solid_angle(double lambda) {
    if (!(lambda >= 0.0 && lambda <= std::numbers::pi))
        throw std::domain_error("cyclic_solid_angle needs lambda in [0, pi]");
    return 2.0 * std::numbers::pi * (1.0 - std::cos(lambda));
}

} // namespace lrq
