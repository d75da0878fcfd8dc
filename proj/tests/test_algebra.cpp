#include <catch2/catch_amalgamated.hpp>

#include "lrq/algebra.hpp"
#include "lrq/drive.hpp"
#include "lrq/invariant.hpp"

#include <cmath>

using namespace lrq;

TEST_CASE("subspace representation entries") {
    const auto rep = build_subspace_rep(0, 1);
    CHECK(rep.lambda_m == 1.0);
    CHECK(rep.Q(1, 0) == complexd(1.0));
    CHECK(rep.Q(0, 0) == complexd(0.0));
    CHECK(rep.Q(0, 1) == complexd(0.0));
    CHECK(rep.Q(1, 1) == complexd(0.0));
    CHECK(rep.sigma_z(0, 0) == complexd(1.0));
    CHECK(rep.sigma_z(1, 1) == complexd(-1.0));
    CHECK(std::real(rep.N(0, 0)) == Catch::Approx(0.5));
    CHECK(std::real(rep.N(1, 1)) == Catch::Approx(1.5));
    CHECK((rep.Q_dag - rep.Q.adjoint()).norm() == 0.0);

    // lambda_2 with two-photon transitions: 4!/2! = 12
    CHECK(build_subspace_rep(2, 2).lambda_m == 12.0);
    // exact integer arithmetic up to the 64-bit cap
    CHECK(factorial_ratio(0, 20) == 2432902008176640000ull);
}

TEST_CASE("subspace representation rejects bad inputs") {
    CHECK_THROWS_AS(build_subspace_rep(0, 0), std::domain_error);
    CHECK_THROWS_AS(build_subspace_rep(-1, 1), std::domain_error);
    CHECK_THROWS_AS(build_subspace_rep(17, 4), std::range_error);
}

TEST_CASE("quasi-algebra relations hold on the doublet") {
    const auto report = verify_susy_relations(build_subspace_rep(0, 1), 1e-12);
    CHECK(report.checks.size() == 11);
    CHECK(report.all_pass());

    // lambda_3 = 5!/3! = 20 shows up as the commutator scale
    const auto rep32 = build_subspace_rep(3, 2);
    CHECK(rep32.lambda_m == 20.0);
    CHECK(verify_susy_relations(rep32, 1e-12).all_pass());
    CHECK((commutator(rep32.Q_dag, rep32.Q) - 20.0 * rep32.sigma_z).norm() < 1e-12);
}

TEST_CASE("quasi-algebra relations hold for every small (m,k)") {
    for (int m = 0; m <= 5; ++m)
        for (int k = 1; k <= 4; ++k) {
            const auto report = verify_susy_relations(build_subspace_rep(m, k), 1e-12);
            INFO("m=" << m << " k=" << k << " max residual " << report.max_residual());
            CHECK(report.all_pass());
        }
}

TEST_CASE("a deliberately scaled Q is caught") {
    auto rep = build_subspace_rep(1, 1);
    rep.Q *= 2.0;
    rep.Q_dag = rep.Q.adjoint();
    const auto report = verify_susy_relations(rep, 1e-12);
    CHECK_FALSE(report.all_pass());
    for (const auto& c : report.checks)
        if (c.name == "{Q+,Q} = lambda_m") {
            CHECK_FALSE(c.pass);
            // {2Q+, 2Q} - lambda = 3 lambda * identity, Frobenius norm 3 lambda sqrt(2)
            CHECK(c.residual ==
                  Catch::Approx(3.0 * rep.lambda_m * std::sqrt(2.0)).epsilon(1e-12));
        }
}

TEST_CASE("spin representations") {
    const auto half = build_spin_rep(1);
    CHECK(half.dim == 2);
    CHECK(std::real(half.J3(0, 0)) == Catch::Approx(0.5));
    CHECK(std::real(half.J3(1, 1)) == Catch::Approx(-0.5));
    CHECK(half.J_plus(0, 1) == complexd(1.0));
    CHECK(half.J_plus(1, 0) == complexd(0.0));

    const auto one = build_spin_rep(2);
    CHECK(one.dim == 3);
    CHECK((commutator(one.J_plus, one.J_minus) - 2.0 * one.J3).norm() < 1e-14);
    CHECK((commutator(one.J3, one.J_plus) - one.J_plus).norm() < 1e-15);
    CHECK((one.J_minus - one.J_plus.adjoint()).norm() == 0.0);
    // Casimir for j = 1: J^2 = 2
    const Matrix casimir = one.J1() * one.J1() + one.J2() * one.J2() + one.J3 * one.J3;
    CHECK((casimir - 2.0 * Matrix::Identity(3, 3)).norm() < 1e-14);

    CHECK_THROWS_AS(build_spin_rep(0), std::domain_error);
}

TEST_CASE("fock representation ladder entries and truncation") {
    const auto fock = build_fock_rep(1, 4);
    CHECK(std::real(fock.a(0, 1)) == Catch::Approx(1.0));
    CHECK(std::real(fock.a(3, 4)) == Catch::Approx(2.0));

    // [a, a+] = 1 away from the truncation boundary; the top level is corrupted
    const Matrix comm = commutator(fock.a, fock.a_dag);
    for (int nlev = 0; nlev < 4; ++nlev)
        CHECK(std::abs(comm(nlev, nlev) - complexd(1.0)) < 1e-14);
    CHECK(std::abs(comm(4, 4) + complexd(4.0)) < 1e-14);

    CHECK_THROWS_AS(build_fock_rep(3, 2), std::domain_error);
    CHECK_THROWS_AS(build_fock_rep(0, 4), std::domain_error);
    CHECK_THROWS_AS(build_fock_rep(1, 65), std::domain_error);
}

TEST_CASE("fock block structure matches the generator layout") {
    const auto fock = build_fock_rep(2, 6);
    const int nf = 7;
    // Q has (a+)^k in the lower-left block and zeros elsewhere
    CHECK(fock.Q_full.topLeftCorner(nf, nf).norm() == 0.0);
    CHECK(fock.Q_full.topRightCorner(nf, nf).norm() == 0.0);
    CHECK(fock.Q_full.bottomRightCorner(nf, nf).norm() == 0.0);
    const Matrix adk_power = fock.a_dag * fock.a_dag;
    // exact-radical entries agree with the repeated product to roundoff
    CHECK((Matrix(fock.Q_full.block(nf, 0, nf, nf)) - adk_power).norm() < 1e-13);
}

TEST_CASE("embedded doublets reproduce the subspace representation") {
    const auto fock = build_fock_rep(2, 10);
    for (int m = 0; m + 2 <= 10; ++m) {
        const auto rep = build_subspace_rep(m, 2);
        CHECK((embedded_block(fock, fock.Q_full, m) - rep.Q).norm() <= 1e-14);
        CHECK((embedded_block(fock, fock.Q_dag_full, m) - rep.Q_dag).norm() <= 1e-14);
        CHECK((embedded_block(fock, fock.sigma_z_full, m) - rep.sigma_z).norm() == 0.0);
        // N's lower block carries a a+, which truncation corrupts at the top
        // Fock level, so the doublet must sit one level clear of it
        if (m + 2 < 10) CHECK((embedded_block(fock, fock.N_full, m) - rep.N).norm() <= 1e-14);
    }
    CHECK_THROWS_AS(embedded_block(fock, fock.Q_full, 9), std::domain_error);
}

TEST_CASE("N' acts as lambda_m on the embedded doublets") {
    const auto fock = build_fock_rep(1, 8);
    for (int m = 0; m <= 6; ++m) {
        const auto [i_up, i_down] = fock.doublet_indices(m);
        const double lam = static_cast<double>(factorial_ratio(m, 1));
        Vector up = Vector::Zero(fock.dim());
        up[i_up] = 1.0;
        Vector down = Vector::Zero(fock.dim());
        down[i_down] = 1.0;
        CHECK((fock.N_prime_full * up - lam * up).norm() < 1e-9);
        CHECK((fock.N_prime_full * down - lam * down).norm() < 1e-9);
    }
}

TEST_CASE("N' commutes with the full Hamiltonian away from the truncation boundary") {
    const auto fock = build_fock_rep(2, 12);
    const DriveParams drive{ScalarDrive::sinusoid(0.2, 0.8, 0.0, 1.2),
                            ScalarDrive::constant(1.6), ScalarDrive::constant(0.17),
                            ScalarDrive::constant(0.05)};
    const Matrix p = fock_level_projector(fock, 12 - 2);
    for (const double t : {0.0, 0.37, 2.0}) {
        const Matrix h = fock_hamiltonian(fock, drive, t);
        CHECK(hermiticity_defect(h) < 1e-12);
        CHECK((p * commutator(fock.N_prime_full, h) * p).norm() <= 1e-10);
    }
}
