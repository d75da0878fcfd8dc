#pragma once

#include "lrq/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrq {

// Finite-dimensional matrix representations of the supersymmetric generators
// of the multiphoton Jaynes-Cummings model, of spin-j angular momentum, and
// of the Fock-truncated cross-check operators.

/// Exact integer (m+k)!/m!. Inputs are capped so the product fits in 64 bits
/// rather than silently losing precision.
inline std::uint64_t factorial_ratio(int m, int k) {
    if (k < 1) throw std::domain_error("photons-per-transition k must be >= 1");
    if (m < 0) throw std::domain_error("photon number m must be >= 0");
    if (m + k > 20)
        throw std::range_error("(m+k)! exceeds 64-bit integer range for m+k > 20 (got m+k = " +
                               std::to_string(m + k) + ")");
    std::uint64_t p = 1;
    for (int i = m + 1; i <= m + k; ++i) p *= static_cast<std::uint64_t>(i);
    return p;
}

/// The 2x2 representation of {Q, Q^dag, sigma_z, N} in one eigenspace of the
/// conserved generator N', with scalar eigenvalue lambda_m = (m+k)!/m!.
///
/// Basis ordering is fixed once for the whole library:
///   e1 = |m> (x) |atom-up>,   e2 = |m+k> (x) |atom-down>.
/// Every downstream sign convention traces back to this choice.
struct SubspaceRep {
    int m = 0;
    int k = 1;
    double lambda_m = 1.0;
    Matrix Q, Q_dag, sigma_z, N;
};

inline SubspaceRep build_subspace_rep(int m, int k) {
    SubspaceRep rep;
    rep.m = m;
    rep.k = k;
    rep.lambda_m = static_cast<double>(factorial_ratio(m, k));
    const double root = std::sqrt(rep.lambda_m);
    rep.Q = Matrix::Zero(2, 2);
    rep.Q(1, 0) = root;
    rep.Q_dag = rep.Q.adjoint();
    rep.sigma_z = Matrix::Zero(2, 2);
    rep.sigma_z(0, 0) = 1.0;
    rep.sigma_z(1, 1) = -1.0;
    rep.N = Matrix::Zero(2, 2);
    rep.N(0, 0) = m + 0.5 * k;
    rep.N(1, 1) = m + 0.5 * k + 1.0;
    return rep;
}

struct RelationCheck {
    std::string name;
    double residual = 0.0;
    bool pass = false;
};

struct RelationReport {
    std::vector<RelationCheck> checks;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    double max_residual() const {
        double r = 0.0;
        for (const auto& c : checks) r = std::max(r, c.residual);
        return r;
    }
};

/// Check the closed quasi-algebra of (N, Q, Q^dag, sigma_z) as matrix
/// identities, reporting the Frobenius-norm residual of each relation.
inline RelationReport verify_susy_relations(const SubspaceRep& rep, double tol) {
    const Matrix& Q = rep.Q;
    const Matrix& Qd = rep.Q_dag;
    const Matrix& sz = rep.sigma_z;
    const Matrix& N = rep.N;
    const Matrix id = Matrix::Identity(2, 2);
    const double lam = rep.lambda_m;

    RelationReport report;
    auto check = [&](std::string name, const Matrix& diff) {
        const double r = diff.norm();
        report.checks.push_back({std::move(name), r, r <= tol});
    };

    check("Q^2 = 0", Q * Q);
    check("(Q+)^2 = 0", Qd * Qd);
    check("[Q+,Q] = lambda_m sigma_z", commutator(Qd, Q) - lam * sz);
    check("{Q+,Q} = lambda_m", anticommutator(Qd, Q) - lam * id);
    check("(Q+-Q)^2 = -lambda_m", (Qd - Q) * (Qd - Q) + lam * id);
    check("[N,Q] = Q", commutator(N, Q) - Q);
    check("[N,Q+] = -Q+", commutator(N, Qd) + Qd);
    check("{Q,sigma_z} = 0", anticommutator(Q, sz));
    check("{Q+,sigma_z} = 0", anticommutator(Qd, sz));
    check("[Q,sigma_z] = 2Q", commutator(Q, sz) - 2.0 * Q);
    check("[Q+,sigma_z] = -2Q+", commutator(Qd, sz) + 2.0 * Qd);
    return report;
}

/// Spin-j ladder representation, basis ordered m = j, j-1, ..., -j.
struct SpinRep {
    int two_j = 1;
    int dim = 2;
    Matrix J_plus, J_minus, J3;

    double j() const { return 0.5 * two_j; }
    Matrix J1() const { return 0.5 * (J_plus + J_minus); }
    Matrix J2() const { return (J_plus - J_minus) / (2.0 * iu); }
    /// J3 eigenvalue at basis index i.
    double m_of(int i) const { return j() - i; }
};

inline SpinRep build_spin_rep(int two_j) {
    if (two_j < 1) throw std::domain_error("spin representation needs two_j >= 1");
    SpinRep rep;
    rep.two_j = two_j;
    rep.dim = two_j + 1;
    const double j = 0.5 * two_j;
    rep.J3 = Matrix::Zero(rep.dim, rep.dim);
    rep.J_plus = Matrix::Zero(rep.dim, rep.dim);
    for (int i = 0; i < rep.dim; ++i) {
        const double m = j - i;
        rep.J3(i, i) = m;
        if (i >= 1) rep.J_plus(i - 1, i) = std::sqrt(j * (j + 1) - m * (m + 1));
    }
    rep.J_minus = rep.J_plus.adjoint();
    return rep;
}

/// Truncated Fock-space generators. The 2(n_max+1)-dimensional block
/// operators order the atom-up sector first, mirroring SubspaceRep.
/// (a+)^k blocks carry entries sqrt((m+k)!/m!) computed from the exact
/// integer product under the radical, so embedded subspace blocks agree
/// with build_subspace_rep bit-for-bit where factorials are representable.
struct FockRep {
    int k = 1;
    int n_max = 1;
    Matrix a, a_dag;
    Matrix Q_full, Q_dag_full, sigma_z_full, N_full, N_prime_full;

    int dim() const { return 2 * (n_max + 1); }
    /// Full-space indices of the embedded doublet (|m,up>, |m+k,down>).
    std::pair<int, int> doublet_indices(int m) const { return {m, (n_max + 1) + m + k}; }
};

inline FockRep build_fock_rep(int k, int n_max) {
    if (k < 1) throw std::domain_error("photons-per-transition k must be >= 1");
    if (n_max < k) throw std::domain_error("Fock truncation n_max must be >= k");
    if (n_max > 64) throw std::domain_error("Fock truncation capped at n_max <= 64");

    FockRep rep;
    rep.k = k;
    rep.n_max = n_max;
    const int nf = n_max + 1;

    rep.a = Matrix::Zero(nf, nf);
    for (int n = 1; n <= n_max; ++n) rep.a(n - 1, n) = std::sqrt(static_cast<double>(n));
    rep.a_dag = rep.a.adjoint();

    // (a+)^k with exact products under the radical
    Matrix adk = Matrix::Zero(nf, nf);
    for (int m = 0; m + k <= n_max; ++m) {
        long double prod = 1.0L;
        for (int i = m + 1; i <= m + k; ++i) prod *= static_cast<long double>(i);
        adk(m + k, m) = std::sqrt(static_cast<double>(prod));
    }

    const int d = rep.dim();
    rep.Q_full = Matrix::Zero(d, d);
    rep.Q_full.block(nf, 0, nf, nf) = adk;
    rep.Q_dag_full = rep.Q_full.adjoint();

    rep.sigma_z_full = Matrix::Zero(d, d);
    rep.sigma_z_full.topLeftCorner(nf, nf) = Matrix::Identity(nf, nf);
    rep.sigma_z_full.bottomRightCorner(nf, nf) = -Matrix::Identity(nf, nf);

    rep.N_full = Matrix::Zero(d, d);
    rep.N_full.topLeftCorner(nf, nf) = rep.a_dag * rep.a + 0.5 * k * Matrix::Identity(nf, nf);
    rep.N_full.bottomRightCorner(nf, nf) = rep.a * rep.a_dag - 0.5 * k * Matrix::Identity(nf, nf);

    rep.N_prime_full = Matrix::Zero(d, d);
    rep.N_prime_full.topLeftCorner(nf, nf) = adk.adjoint() * adk;    // a^k (a+)^k
    rep.N_prime_full.bottomRightCorner(nf, nf) = adk * adk.adjoint(); // (a+)^k a^k
    return rep;
}

/// Extract the 2x2 block of a full-space operator on the doublet spanned by
/// (|m,up>, |m+k,down>).
inline Matrix embedded_block(const FockRep& rep, const Matrix& op_full, int m) {
    if (m < 0 || m + rep.k > rep.n_max)
        throw std::domain_error("embedded doublet requires 0 <= m and m+k <= n_max");
    const auto [i_up, i_down] = rep.doublet_indices(m);
    Matrix out(2, 2);
    out(0, 0) = op_full(i_up, i_up);
    out(0, 1) = op_full(i_up, i_down);
    out(1, 0) = op_full(i_down, i_up);
    out(1, 1) = op_full(i_down, i_down);
    return out;
}

/// Projector onto Fock levels 0..n_keep in both atom sectors. Algebra checks
/// on FockRep are asserted on levels away from the truncation boundary.
inline Matrix fock_level_projector(const FockRep& rep, int n_keep) {
    const int nf = rep.n_max + 1;
    Matrix p = Matrix::Zero(rep.dim(), rep.dim());
    for (int n = 0; n <= n_keep && n <= rep.n_max; ++n) {
        p(n, n) = 1.0;
        p(nf + n, nf + n) = 1.0;
    }
    return p;
}

} // namespace lrq
