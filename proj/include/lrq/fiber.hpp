#pragma once

#include "lrq/algebra.hpp"
#include "lrq/drive.hpp"
#include "lrq/errors.hpp"
#include "lrq/invariant.hpp"
#include "lrq/linalg.hpp"
#include "lrq/oracle.hpp"
#include "lrq/quadrature.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace lrq {

// Photon transport along a curved optical fiber in the spin-1 picture: the
// momentum direction k_hat(t) drives an effective Hamiltonian
//   H_eff = (k_hat x dk_hat/dt) . J,
// whose invariant is the helicity k_hat . J. The propagator factorizes into
// the explicit form U(t) = V(t) exp(f J3) with f the accumulated
// (imaginary) geometric phase rate, so no chronological product is needed.

/// Momentum-direction path in spherical polar angles. k_hat has unit norm by
/// construction; the wavenumber magnitude is constant along the fiber.
struct FiberPath {
    std::function<double(double)> lambda;
    std::function<double(double)> gamma;
    std::function<double(double)> lambda_dot;
    std::function<double(double)> gamma_dot;
    double k_mag = 1.0;
    double t_final = 0.0;

    Eigen::Vector3d k_hat(double t) const {
        const double l = lambda(t), g = gamma(t);
        return {std::sin(l) * std::cos(g), std::sin(l) * std::sin(g), std::cos(l)};
    }

    /// k_hat x dk_hat/dt, analytic in the spherical frame:
    ///   lambda_dot * gamma_hat - gamma_dot sin(lambda) * lambda_hat.
    Eigen::Vector3d omega_vec(double t) const {
        const double l = lambda(t), g = gamma(t);
        const double ld = lambda_dot(t), gd = gamma_dot(t);
        if (!std::isfinite(ld) || !std::isfinite(gd))
            throw numerical_error("non-finite path derivative at t = " + std::to_string(t));
        const Eigen::Vector3d lambda_hat{std::cos(l) * std::cos(g), std::cos(l) * std::sin(g),
                                         -std::sin(l)};
        const Eigen::Vector3d gamma_hat{-std::sin(g), std::cos(g), 0.0};
        return ld * gamma_hat - gd * std::sin(l) * lambda_hat;
    }
};

/// Helix geometry: pitch angle arctan(2 pi r / pitch), one gamma revolution
/// per turn.
struct HelixSpec {
    double radius = 1.0;
    double pitch = 2.0 * std::numbers::pi;
    double n_turns = 1.0;

    double pitch_angle() const {
        if (!(radius > 0.0) || !(pitch > 0.0))
            throw std::domain_error("helix radius and pitch must be positive");
        return std::atan2(2.0 * std::numbers::pi * radius, pitch);
    }
};

/// Uniform traversal of the helix: lambda constant at the pitch angle,
/// gamma advancing 2 pi per turn.
inline FiberPath helix_to_path(const HelixSpec& spec, double t_final) {
    if (!(t_final > 0.0)) throw std::domain_error("traversal time must be positive");
    const double l = spec.pitch_angle();
    const double rate = 2.0 * std::numbers::pi * spec.n_turns / t_final;
    FiberPath path;
    path.lambda = [l](double) { return l; };
    path.lambda_dot = [](double) { return 0.0; };
    path.gamma = [rate](double t) { return rate * t; };
    path.gamma_dot = [rate](double) { return rate; };
    path.t_final = t_final;
    return path;
}

/// Helix entered through a smooth ramp from the pole: lambda rises from 0 to
/// the pitch angle over ramp_fraction of the traversal (C^2 smootherstep, so
/// the start matches the straight-fiber initial condition lambda(0) = 0 with
/// V(0) = 1 and finite derivatives).
inline FiberPath ramped_helix_to_path(const HelixSpec& spec, double t_final,
                                      double ramp_fraction = 0.25) {
    if (!(t_final > 0.0)) throw std::domain_error("traversal time must be positive");
    if (!(ramp_fraction > 0.0 && ramp_fraction < 1.0))
        throw std::domain_error("ramp_fraction must lie in (0, 1)");
    const double l_final = spec.pitch_angle();
    const double t_ramp = ramp_fraction * t_final;
    const double rate = 2.0 * std::numbers::pi * spec.n_turns / t_final;
    FiberPath path;
    path.lambda = [l_final, t_ramp](double t) {
        if (t >= t_ramp) return l_final;
        const double u = t / t_ramp;
        return l_final * u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
    };
    path.lambda_dot = [l_final, t_ramp](double t) {
        if (t >= t_ramp) return 0.0;
        const double u = t / t_ramp;
        return l_final * 30.0 * u * u * (1.0 + u * (-2.0 + u)) / t_ramp;
    };
    path.gamma = [rate](double t) { return rate * t; };
    path.gamma_dot = [rate](double) { return rate; };
    path.t_final = t_final;
    return path;
}

/// Path from explicit angle families (e.g. a tabulated t,lambda,gamma CSV).
inline FiberPath path_from_angles(ScalarDrive lambda, ScalarDrive gamma, double t_final,
                                  double k_mag = 1.0) {
    if (!(t_final > 0.0)) throw std::domain_error("traversal time must be positive");
    FiberPath path;
    path.lambda = [lambda](double t) { return lambda(t); };
    path.lambda_dot = [lambda](double t) { return lambda.derivative(t); };
    path.gamma = [gamma](double t) { return gamma(t); };
    path.gamma_dot = [gamma](double t) { return gamma.derivative(t); };
    path.k_mag = k_mag;
    path.t_final = t_final;
    return path;
}

/// H_eff(t) = omega_vec(t) . J in the given spin representation (j = 1 for
/// the photon). The cross product is used unnormalized.
inline Matrix effective_hamiltonian(const FiberPath& path, const SpinRep& rep, double t) {
    const Eigen::Vector3d w = path.omega_vec(t);
    return w.x() * rep.J1() + w.y() * rep.J2() + w.z() * rep.J3;
}

/// Helicity operator k_hat(t) . J, the invariant of the fiber evolution.
inline Matrix helicity_operator(const FiberPath& path, const SpinRep& rep, double t) {
    const Eigen::Vector3d k = path.k_hat(t);
    return k.x() * rep.J1() + k.y() * rep.J2() + k.z() * rep.J3;
}

/// Geometric phase integral int_0^t gamma_dot (1 - cos lambda) dt' by
/// composite Simpson on n_quad uniform panels.
inline double geometric_phase_integral(const FiberPath& path, double t, int n_quad = 4096) {
    if (!(t >= 0.0 && t <= path.t_final * (1.0 + 1e-12)))
        throw std::invalid_argument("time outside the path window");
    if (t == 0.0) return 0.0;
    std::vector<double> f(static_cast<std::size_t>(n_quad) + 1);
    for (int j = 0; j <= n_quad; ++j) {
        const double tj = t * j / n_quad;
        f[j] = path.gamma_dot(tj) * (1.0 - std::cos(path.lambda(tj)));
    }
    return simpson(f, t / n_quad);
}

/// Geometric phase of the helicity-sigma photon: sigma times the integral.
inline double fiber_geometric_phase(const FiberPath& path, int sigma, double t, int n_quad = 4096) {
    if (sigma != +1 && sigma != -1 && sigma != 0)
        throw std::domain_error("fiber branch sigma must be +1, -1 or 0");
    return sigma * geometric_phase_integral(path, t, n_quad);
}

/// Explicit propagator U(t) = V(t) exp(f J3) with f = -i int gamma_dot (1 -
/// cos lambda) dt'. V(0) = 1 holds automatically when lambda(0) = 0; for a
/// direct constant-lambda start U(0) = V(0) defines the co-moving initial
/// frame.
inline Matrix explicit_U(const FiberPath& path, const SpinRep& rep, double t, int n_quad = 4096) {
    const double phase = geometric_phase_integral(path, t, n_quad);
    const Matrix v = spin_V(rep, path.lambda(t), path.gamma(t));
    Matrix expf = Matrix::Zero(rep.dim, rep.dim);
    for (int i = 0; i < rep.dim; ++i)
        expf(i, i) = std::exp(-iu * phase * rep.m_of(i)); // exp(f J3), f = -i * phase
    return v * expf;
}

/// J3 eigenvector with eigenvalue sigma (the helicity branch at k_hat = z).
inline StateVector helicity_eigenvector(const SpinRep& rep, int sigma) {
    for (int i = 0; i < rep.dim; ++i)
        if (std::abs(rep.m_of(i) - sigma) < 1e-12) {
            StateVector e = StateVector::Zero(rep.dim);
            e[i] = 1.0;
            return e;
        }
    throw std::domain_error("sigma is not a J3 eigenvalue of this representation");
}

/// || (k_hat(t) . J) psi(t) - sigma psi(t) || for psi(t) = U(t) |sigma>.
/// Zero up to quadrature error: the helicity eigenvalue is conserved.
inline double helicity_residual(const FiberPath& path, const SpinRep& rep, int sigma, double t,
                                int n_quad = 4096) {
    if (sigma != +1 && sigma != -1)
        throw std::domain_error("helicity branch sigma must be +1 or -1");
    const StateVector psi = explicit_U(path, rep, t, n_quad) * helicity_eigenvector(rep, sigma);
    return (helicity_operator(path, rep, t) * psi - static_cast<double>(sigma) * psi).norm();
}

/// Max over components of | <psi(t)| J_mu |psi(t)> - sigma k_hat_mu(t) |:
/// the evolved state transports the momentum direction.
inline double momentum_transport_check(const FiberPath& path, const SpinRep& rep, int sigma,
                                       double t, int n_quad = 4096) {
    if (sigma != +1 && sigma != -1)
        throw std::domain_error("momentum branch sigma must be +1 or -1");
    const StateVector psi = explicit_U(path, rep, t, n_quad) * helicity_eigenvector(rep, sigma);
    const Eigen::Vector3d k = path.k_hat(t);
    const double n2 = psi.squaredNorm();
    const double jx = std::real(psi.dot(rep.J1() * psi)) / n2;
    const double jy = std::real(psi.dot(rep.J2() * psi)) / n2;
    const double jz = std::real(psi.dot(rep.J3 * psi)) / n2;
    return std::max({std::abs(jx - sigma * k.x()), std::abs(jy - sigma * k.y()),
                     std::abs(jz - sigma * k.z())});
}

struct ChiaoWuReport {
    double max_residual = 0.0;
};

/// Invariant-equation residual for I(t) = k_hat(t) . J against H_eff(t),
/// centered-differenced on the supplied grid. Holds by construction since
/// dk_hat/dt = omega_vec x k_hat; the check is finite-difference limited.
inline ChiaoWuReport verify_chiao_wu_invariance(const FiberPath& path, const SpinRep& rep,
                                                std::span<const double> t_grid) {
    ChiaoWuReport report;
    if (t_grid.size() < 3) return report;
    for (std::size_t j = 1; j + 1 < t_grid.size(); ++j) {
        const double dtm = t_grid[j] - t_grid[j - 1];
        const double dtp = t_grid[j + 1] - t_grid[j];
        const Matrix didt = (helicity_operator(path, rep, t_grid[j + 1]) -
                             helicity_operator(path, rep, t_grid[j - 1])) /
                            (dtm + dtp);
        const Matrix inv = helicity_operator(path, rep, t_grid[j]);
        const Matrix h = effective_hamiltonian(path, rep, t_grid[j]);
        report.max_residual = std::max(report.max_residual, (didt - iu * commutator(inv, h)).norm());
    }
    return report;
}

} // namespace lrq
