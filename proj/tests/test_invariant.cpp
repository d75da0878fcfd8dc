#include <catch2/catch_amalgamated.hpp>

#include "lrq/algebra.hpp"
#include "lrq/drive.hpp"
#include "lrq/invariant.hpp"
#include "lrq/phase.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace lrq;

namespace {

DriveParams decoupled_drive(double omega, double delta) {
    // delta = k*omega - omega0 with k = 1
    return {ScalarDrive::constant(omega), ScalarDrive::constant(omega - delta),
            ScalarDrive::constant(0.0), ScalarDrive::constant(0.0)};
}

DriveParams sinusoid_drive() {
    return {ScalarDrive::sinusoid(0.15, 0.6, 0.0, 1.1), ScalarDrive::sinusoid(0.15, 0.4, 0.0, 1.5),
            ScalarDrive::sinusoid(0.04, 0.5, 0.0, 0.12), ScalarDrive::constant(0.0)};
}

} // namespace

TEST_CASE("decoupled drive: lambda frozen, gamma advancing at -delta") {
    const auto rep = build_subspace_rep(0, 1);
    const double d = 0.1;
    const auto traj = solve_auxiliary_jc(decoupled_drive(1.0, d), rep, 1.0, 0.0, 10.0, 10000);
    CHECK(traj.lambda.front() == 1.0);
    for (const double l : traj.lambda) CHECK(l == Catch::Approx(1.0).margin(1e-12));
    CHECK(traj.gamma.back() == Catch::Approx(-d * 10.0).margin(1e-10));
    CHECK(invariant_residual(traj, decoupled_drive(1.0, d), rep) <= 1e-9);
}

TEST_CASE("resonant real coupling with gamma0 = pi/2 freezes the azimuth") {
    const auto rep = build_subspace_rep(0, 1);
    const DriveParams drive{ScalarDrive::constant(1.0), ScalarDrive::constant(1.0),
                            ScalarDrive::constant(0.1), ScalarDrive::constant(0.0)};
    const double g0 = 0.5 * std::numbers::pi;
    const auto traj = solve_auxiliary_jc(drive, rep, 2.5, g0, 9.0, 10000);
    for (const double g : traj.gamma) CHECK(g == Catch::Approx(g0).margin(1e-10));
    // lambda sweeps linearly at -2 sqrt(lambda_m) |g|
    CHECK(traj.lambda.back() == Catch::Approx(2.5 - 0.2 * 9.0).margin(1e-9));
    CHECK(invariant_residual(traj, drive, rep) <= 1e-8);
}

TEST_CASE("sinusoidal drive keeps the invariant residual small") {
    const auto rep = build_subspace_rep(0, 2);
    const auto drive = sinusoid_drive();
    const auto traj = solve_auxiliary_jc(drive, rep, 0.5 * std::numbers::pi, 0.3, 10.0, 10000);
    CHECK(invariant_residual(traj, drive, rep) <= 1e-6);
}

TEST_CASE("halving dt improves the residual about fourfold") {
    const auto rep = build_subspace_rep(0, 2);
    const auto drive = sinusoid_drive();
    const auto coarse = solve_auxiliary_jc(drive, rep, 0.5 * std::numbers::pi, 0.3, 10.0, 2000);
    const auto fine = solve_auxiliary_jc(drive, rep, 0.5 * std::numbers::pi, 0.3, 10.0, 4000);
    const double r1 = invariant_residual(coarse, drive, rep);
    const double r2 = invariant_residual(fine, drive, rep);
    INFO("r(coarse)=" << r1 << " r(fine)=" << r2 << " ratio=" << r1 / r2);
    CHECK(r1 / r2 > 3.9); // centered differencing dominates: ratio -> 4 from below
}

TEST_CASE("corrupting gamma is detected by the residual") {
    const auto rep = build_subspace_rep(0, 2);
    const auto drive = sinusoid_drive();
    auto traj = solve_auxiliary_jc(drive, rep, 0.5 * std::numbers::pi, 0.3, 10.0, 4000);
    for (std::size_t j = 0; j < traj.gamma.size(); ++j) traj.gamma[j] += 0.01 * traj.t[j];
    CHECK(invariant_residual(traj, drive, rep) > 1e-3);
}

TEST_CASE("pole crossing fails fast with the offending time") {
    const auto rep = build_subspace_rep(0, 1);
    // gamma frozen at pi/2: lambda drifts linearly into the pole at ~t = 5
    const DriveParams drive{ScalarDrive::constant(1.0), ScalarDrive::constant(1.0),
                            ScalarDrive::constant(0.1), ScalarDrive::constant(0.0)};
    try {
        solve_auxiliary_jc(drive, rep, 1.0, 0.5 * std::numbers::pi, 20.0, 4000);
        FAIL("expected singularity_error");
    } catch (const singularity_error& e) {
        CHECK(e.time() == Catch::Approx(5.0).margin(0.1));
        CHECK(std::string(e.what()).find("t = ") != std::string::npos);
    }
}

TEST_CASE("solver validates its inputs") {
    const auto rep = build_subspace_rep(0, 1);
    const auto drive = decoupled_drive(1.0, 0.1);
    CHECK_THROWS_AS(solve_auxiliary_jc(drive, rep, 0.0, 0.0, 1.0, 1000), std::domain_error);
    CHECK_THROWS_AS(solve_auxiliary_jc(drive, rep, 3.2, 0.0, 1.0, 1000), std::domain_error);
    CHECK_THROWS_AS(solve_auxiliary_jc(drive, rep, 1.0, 0.0, 1.0, 50), std::invalid_argument);
    CHECK_THROWS_AS(solve_auxiliary_jc(drive, rep, 1.0, 0.0, -1.0, 1000), std::invalid_argument);

    const DriveParams nan_drive{ScalarDrive::constant(std::numeric_limits<double>::quiet_NaN()),
                                ScalarDrive::constant(1.0), ScalarDrive::constant(0.0),
                                ScalarDrive::constant(0.0)};
    CHECK_THROWS_AS(solve_auxiliary_jc(nan_drive, rep, 1.0, 0.0, 1.0, 1000), numerical_error);
}

TEST_CASE("invariant matrix: special values and spectrum") {
    const auto rep01 = build_subspace_rep(0, 1);
    CHECK((build_invariant(rep01, 0.0, 1.23) - rep01.sigma_z).norm() < 1e-15);

    Matrix sx(2, 2);
    sx << 0.0, 1.0, 1.0, 0.0;
    CHECK((build_invariant(rep01, 0.5 * std::numbers::pi, 0.0) - sx).norm() < 1e-15);

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> lam(0.05, 3.1), gam(0.0, 2.0 * std::numbers::pi);
    const auto rep = build_subspace_rep(2, 3);
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix inv = build_invariant(rep, lam(rng), gam(rng));
        CHECK(hermiticity_defect(inv) < 1e-15);
        CHECK(std::abs(inv.trace()) < 1e-15);
        CHECK(std::abs(inv.determinant() - complexd(-1.0)) < 1e-14);
    }
}

TEST_CASE("V diagonalizes the invariant to sigma_z") {
    const auto rep01 = build_subspace_rep(0, 1);
    CHECK((build_V(rep01, 0.0, 0.7) - Matrix::Identity(2, 2)).norm() < 1e-15);

    // at lambda = pi/2, gamma = 0 the rotation is the 45-degree real one;
    // the sign pattern follows from Q sitting in the lower-left corner
    const Matrix v = build_V(rep01, 0.5 * std::numbers::pi, 0.0);
    const double c = std::cos(0.25 * std::numbers::pi);
    Matrix expected(2, 2);
    expected << c, -c, c, c;
    CHECK((v - expected).norm() < 1e-14);

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> lam(0.1, 3.0), gam(0.0, 2.0 * std::numbers::pi);
    for (const auto& rep : {build_subspace_rep(0, 1), build_subspace_rep(3, 2)}) {
        for (int trial = 0; trial < 500; ++trial) {
            const double l = lam(rng), g = gam(rng);
            const Matrix vv = build_V(rep, l, g);
            CHECK((vv.adjoint() * vv - Matrix::Identity(2, 2)).norm() < 1e-13);
            CHECK((vv.adjoint() * build_invariant(rep, l, g) * vv - rep.sigma_z).norm() <= 1e-10);
        }
    }
}

TEST_CASE("spin V diagonalizes the spin invariant to J3") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> lam(0.1, 3.0), gam(0.0, 2.0 * std::numbers::pi);
    for (const int two_j : {1, 2, 3}) {
        const auto rep = build_spin_rep(two_j);
        for (int trial = 0; trial < 200; ++trial) {
            const double l = lam(rng), g = gam(rng);
            const Matrix v = spin_V(rep, l, g);
            CHECK((v.adjoint() * spin_invariant(rep, l, g) * v - rep.J3).norm() <= 1e-10);
        }
    }
}

TEST_CASE("transform_hamiltonian with constant V returns H") {
    const auto rep = build_subspace_rep(0, 1);
    const auto drive = sinusoid_drive();
    std::vector<Matrix> h(5), v(5, Matrix::Identity(2, 2));
    for (int j = 0; j < 5; ++j) h[j] = jc_hamiltonian(rep, drive, 0.1 * j);
    const auto hv = transform_hamiltonian(h, v, 0.1);
    for (int j = 0; j < 5; ++j) CHECK((hv[j] - h[j]).norm() < 1e-13);

    CHECK_THROWS_AS(transform_hamiltonian(std::vector<Matrix>(2), std::vector<Matrix>(2), 0.1),
                    std::invalid_argument);
    CHECK_THROWS_AS(transform_hamiltonian(h, std::vector<Matrix>(4), 0.1), std::invalid_argument);
}

TEST_CASE("transformed Hamiltonian is diagonal along a solved trajectory") {
    const auto rep = build_subspace_rep(0, 2);
    const auto drive = sinusoid_drive();
    const auto traj = solve_auxiliary_jc(drive, rep, 0.5 * std::numbers::pi, 0.3, 10.0, 10000);
    const std::size_t n = traj.t.size();
    std::vector<Matrix> h(n), v(n);
    for (std::size_t j = 0; j < n; ++j) {
        h[j] = jc_hamiltonian(rep, drive, traj.t[j]);
        v[j] = build_V(rep, traj.lambda[j], traj.gamma[j]);
    }
    const auto hv = transform_hamiltonian(h, v, traj.dt());
    double offdiag = 0.0, herm = 0.0;
    for (std::size_t j = 1; j + 1 < n; ++j) {
        offdiag = std::max({offdiag, std::abs(hv[j](0, 1)), std::abs(hv[j](1, 0))});
        herm = std::max(herm, hermiticity_defect(hv[j]));
    }
    CHECK(offdiag <= 1e-6);
    CHECK(herm <= 1e-5);
}

TEST_CASE("spin model: decoupled axial drive and H_V diagonal value") {
    // theta = 0: lambda frozen, gamma advancing at +c0 (sign fixed by the
    // invariant-equation residual, which is asserted below)
    const SpinDrive axial{ScalarDrive::constant(0.3), ScalarDrive::constant(0.0),
                          ScalarDrive::constant(0.0)};
    const auto rep = build_spin_rep(1);
    const auto traj = solve_auxiliary_spin(axial, 1.1, 0.2, 5.0, 5000);
    for (const double l : traj.lambda) CHECK(l == Catch::Approx(1.1).margin(1e-12));
    CHECK(traj.gamma.back() == Catch::Approx(0.2 + 0.3 * 5.0).margin(1e-9));
    CHECK(spin_invariant_residual(traj, axial, rep) <= 1e-8);

    const SpinDrive drive{ScalarDrive::constant(1.0), ScalarDrive::constant(0.4),
                          ScalarDrive::linear(0.0, 0.6)};
    const auto traj2 = solve_auxiliary_spin(drive, 0.8, 0.0, 6.0, 6000);
    CHECK(spin_invariant_residual(traj2, drive, rep) <= 1e-6);

    const std::size_t n = traj2.t.size();
    std::vector<Matrix> h(n), v(n);
    for (std::size_t j = 0; j < n; ++j) {
        h[j] = spin_hamiltonian(rep, drive, traj2.t[j]);
        v[j] = spin_V(rep, traj2.lambda[j], traj2.gamma[j]);
    }
    const auto hv = transform_hamiltonian(h, v, traj2.dt());
    double worst = 0.0;
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double t = traj2.t[j];
        const double l = traj2.lambda[j];
        const double expect =
            drive.c0(t) * (std::cos(l) * std::cos(drive.theta(t)) +
                           std::sin(l) * std::sin(drive.theta(t)) *
                               std::cos(traj2.gamma[j] - drive.phi(t))) +
            traj2.gamma_dot[j] * (1.0 - std::cos(l));
        worst = std::max({worst, std::abs(hv[j](0, 0) - 0.5 * expect),
                          std::abs(hv[j](1, 1) + 0.5 * expect), std::abs(hv[j](0, 1))});
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("invariant eigenvalues stay exactly +-1 along trajectories") {
    const auto rep = build_subspace_rep(0, 2);
    const auto drive = sinusoid_drive();
    const auto traj = solve_auxiliary_jc(drive, rep, 0.5 * std::numbers::pi, 0.3, 10.0, 2000);
    for (std::size_t j = 0; j < traj.t.size(); j += 100) {
        const Matrix inv = build_invariant(rep, traj.lambda[j], traj.gamma[j]);
        Eigen::SelfAdjointEigenSolver<Matrix> es(inv);
        CHECK(std::abs(es.eigenvalues()[0] + 1.0) < 1e-10);
        CHECK(std::abs(es.eigenvalues()[1] - 1.0) < 1e-10);
    }
}

TEST_CASE("gamma is stored unwrapped with a consistent derivative") {
    const auto rep = build_subspace_rep(0, 1);
    // gamma crosses many multiples of 2 pi without jumps
    const auto drive = decoupled_drive(1.0, -2.0);
    const auto traj = solve_auxiliary_jc(drive, rep, 1.0, 0.0, 30.0, 6000);
    CHECK(traj.gamma.back() == Catch::Approx(60.0).margin(1e-8));
    for (std::size_t j = 1; j < traj.gamma.size(); ++j)
        CHECK(std::abs(traj.gamma[j] - traj.gamma[j - 1]) < 1.0);

    // centered difference of gamma agrees with the stored derivative
    const double dt = traj.dt();
    double gddot_max = 0.0;
    for (std::size_t j = 1; j + 1 < traj.gamma_dot.size(); ++j)
        gddot_max = std::max(gddot_max,
                             std::abs(traj.gamma_dot[j + 1] - traj.gamma_dot[j - 1]) / (2 * dt));
    for (std::size_t j = 1; j + 1 < traj.gamma.size(); ++j) {
        const double cd = (traj.gamma[j + 1] - traj.gamma[j - 1]) / (2 * dt);
        CHECK(std::abs(cd - traj.gamma_dot[j]) <= 10.0 * dt * dt * std::max(gddot_max, 1.0));
    }
}

TEST_CASE("BCH series for V^dag dV/dt matches centered differencing") {
    // dedicated cross-check on small-norm generators: the adjoint series
    //   V^dag dV/dt = sum_n (-ad_L)^n (dL/dt) / (n+1)!
    // summed to 12 terms against the product-form numerical derivative
    const auto rep = build_subspace_rep(1, 2);
    auto lam = [](double t) { return 0.25 + 0.05 * std::sin(t); };
    auto gam = [](double t) { return 0.3 * t; };
    auto gen = [&](double t) -> Matrix {
        const complexd alpha = 0.5 * lam(t) * std::exp(iu * gam(t)) / std::sqrt(rep.lambda_m);
        return alpha * rep.Q - std::conj(alpha) * rep.Q_dag;
    };
    const double t = 0.8, h = 1e-5;
    const Matrix l = gen(t);
    const Matrix ldot = (gen(t + h) - gen(t - h)) / (2 * h);
    Matrix series = Matrix::Zero(2, 2);
    Matrix term = ldot;
    double factorial = 1.0;
    for (int n = 0; n < 12; ++n) {
        factorial *= (n + 1);
        series += term / factorial;
        term = -commutator(l, term); // (-ad_L)^{n+1} (Ldot)
    }
    const Matrix v = build_V(rep, lam(t), gam(t));
    const Matrix vdot =
        (build_V(rep, lam(t + h), gam(t + h)) - build_V(rep, lam(t - h), gam(t - h))) / (2 * h);
    CHECK((v.adjoint() * vdot - series).norm() < 1e-8);
}

TEST_CASE("random drives: every solved trajectory satisfies the core invariants") {
    // hand-rolled generator; coupling scaled by 1/sqrt(lambda_m) so the
    // azimuth keeps rotating and the polar angle stays clear of the poles
    std::mt19937 rng(20020516);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int solved = 0;
    for (int trial = 0; trial < 25; ++trial) {
        const int m = static_cast<int>(unit(rng) * 3.999);
        const int k = 1 + static_cast<int>(unit(rng) * 2.999);
        const auto rep = build_subspace_rep(m, k);
        const double root = std::sqrt(rep.lambda_m);
        const double w_off = 0.8 + 0.6 * unit(rng);
        const double w_amp = 0.2 * unit(rng);
        const double d_off = 0.5 + 0.5 * unit(rng); // detuning kept positive
        const double g_off = (0.02 + 0.08 * unit(rng)) / root;
        const double g_amp = 0.3 * g_off * unit(rng);
        const DriveParams drive{
            ScalarDrive::sinusoid(w_amp, 0.3 + unit(rng), unit(rng), w_off),
            ScalarDrive::sinusoid(w_amp, 0.2 + unit(rng), unit(rng), k * w_off - d_off),
            ScalarDrive::sinusoid(g_amp, 0.2 + unit(rng), unit(rng), g_off),
            ScalarDrive::constant(0.05 * g_off * (2.0 * unit(rng) - 1.0))};
        const double lambda0 = 1.2 + 0.7 * unit(rng);
        const double gamma0 = 2.0 * std::numbers::pi * unit(rng);

        const auto traj = solve_auxiliary_jc(drive, rep, lambda0, gamma0, 8.0, 4000);
        ++solved;
        INFO("trial " << trial << " m=" << m << " k=" << k);
        CHECK(invariant_residual(traj, drive, rep) <= 1e-5);
        for (std::size_t j = 0; j < traj.t.size(); j += 400) {
            const Matrix inv = build_invariant(rep, traj.lambda[j], traj.gamma[j]);
            const Matrix v = build_V(rep, traj.lambda[j], traj.gamma[j]);
            CHECK((v.adjoint() * inv * v - rep.sigma_z).norm() <= 1e-10);
            CHECK(std::abs(inv.determinant() - complexd(-1.0)) < 1e-13);
        }
        const auto plus = jc_phase(traj, drive, m, k, +1);
        const auto minus = jc_phase(traj, drive, m, k, -1);
        CHECK(std::abs(plus.phi_g + minus.phi_g) <= 1e-12);
    }
    CHECK(solved == 25); // the generator ranges keep every draw pole-free
}

TEST_CASE("finite parametrization identity linking alpha, c and b") {
    // with alpha = (l/2) e^{i g} / sqrt(lam), c = sin(l) e^{i g} / sqrt(lam),
    // b = cos(l):  sin sqrt(4 a a* lam) = lam (c a* + c* a) / sqrt(4 a a* lam)
    // and cos sqrt(4 a a* lam) = b, both identically in (l, g)
    const double lam_m = 6.0;
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ld(0.05, 3.0), gd(0.0, 2.0 * std::numbers::pi);
    for (int trial = 0; trial < 100; ++trial) {
        const double l = ld(rng), g = gd(rng);
        const complexd a = 0.5 * l * std::exp(iu * g) / std::sqrt(lam_m);
        const complexd c = std::sin(l) * std::exp(iu * g) / std::sqrt(lam_m);
        const double root = std::sqrt(4.0 * std::norm(a) * lam_m);
        CHECK(root == Catch::Approx(l).epsilon(1e-12));
        CHECK(std::sin(root) ==
              Catch::Approx(lam_m * std::real(c * std::conj(a) + std::conj(c) * a) / root)
                  .epsilon(1e-10));
        CHECK(std::cos(root) == Catch::Approx(std::cos(l)).epsilon(1e-12));
    }
}
