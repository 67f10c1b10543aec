#include <doctest.h>

#include <numeric>

#include "../oracles.hpp"
#include "qkac/operators.hpp"

using namespace qkac;

TEST_SUITE("operators") {

TEST_CASE("tensor of identities and of the qubit energy") {
    const auto i2 = OperatorMatrix::identity(2);
    CHECK(max_abs(tensor(i2, i2) - OperatorMatrix::identity(4)) == 0.0);

    const double h[] = {0.0, 1.0};
    const auto hm = OperatorMatrix::diagonal(h);
    const auto h2 = tensor(hm, i2) + tensor(i2, hm);
    // internal order |00>,|01>,|10>,|11>
    const double want[] = {0, 1, 1, 2};
    CHECK(max_abs(h2 - OperatorMatrix::diagonal(want)) == 0.0);
}

TEST_CASE("tensor entries and trace factorisation") {
    std::mt19937_64 rng(11);
    const OperatorMatrix a(oracle::random_matrix(rng, 2)), b(oracle::random_matrix(rng, 3));
    const auto ab = tensor(a, b);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 3; ++k)
                for (std::size_t l = 0; l < 3; ++l) CHECK(std::abs(ab(i * 3 + k, j * 3 + l) - a(i, j) * b(k, l)) < 1e-15);
    CHECK(std::abs(ab.trace() - a.trace() * b.trace()) < 1e-12);
}

TEST_CASE("factor shape guard") {
    CHECK(FactorShape(12, 2).total_dim() == 4096);
    CHECK_THROWS_AS(FactorShape(13, 2), ValidationError);
    CHECK(FactorShape(13, 2, 1 << 14).total_dim() == 8192);
    const FactorShape s(3, 3);
    for (std::size_t f = 0; f < s.total_dim(); ++f) CHECK(s.flat(s.digits(f)) == f);
}

TEST_CASE("permutation unitaries") {
    const FactorShape s2(2, 2);
    const std::vector<std::size_t> id{0, 1}, swap{1, 0};
    CHECK(max_abs(permutation_unitary(id, s2) - OperatorMatrix::identity(4)) == 0.0);

    std::mt19937_64 rng(3);
    const OperatorMatrix a(oracle::random_matrix(rng, 2)), b(oracle::random_matrix(rng, 2));
    const auto u = permutation_unitary(swap, s2);
    CHECK(u.is_unitary(1e-14));
    CHECK(max_abs(u * tensor(a, b) * u.adjoint() - tensor(b, a)) < 1e-14);

    SUBCASE("conjugation reorders product factors") {
        const FactorShape s3(3, 2);
        const OperatorMatrix c(oracle::random_matrix(rng, 2));
        const std::vector<OperatorMatrix> f{a, b, c};
        std::vector<std::size_t> pi{0, 1, 2};
        do {
            const auto up = permutation_unitary(pi, s3);
            const auto lhs = up * tensor(tensor(a, b), c) * up.adjoint();
            const auto rhs = tensor(tensor(f[pi[0]], f[pi[1]]), f[pi[2]]);
            CHECK(max_abs(lhs - rhs) < 1e-13);
            CHECK(max_abs(permute_factors(tensor(tensor(a, b), c), pi, s3) - lhs) < 1e-13);
        } while (std::next_permutation(pi.begin(), pi.end()));
    }

    SUBCASE("composition is reversed: U_pi U_rho = U_{rho o pi}") {
        const FactorShape s3(3, 2);
        std::vector<std::size_t> pi{0, 1, 2};
        do {
            std::vector<std::size_t> rho{0, 1, 2};
            do {
                std::vector<std::size_t> comp(3);
                for (std::size_t m = 0; m < 3; ++m) comp[m] = rho[pi[m]];
                const auto lhs = permutation_unitary(pi, s3) * permutation_unitary(rho, s3);
                CHECK(max_abs(lhs - permutation_unitary(comp, s3)) == 0.0);
            } while (std::next_permutation(rho.begin(), rho.end()));
        } while (std::next_permutation(pi.begin(), pi.end()));
    }

    CHECK_THROWS_AS(permutation_unitary(std::vector<std::size_t>{0, 0}, s2), ValidationError);
}

TEST_CASE("embed_pair") {
    const FactorShape s3(3, 2);
    CHECK(max_abs(embed_pair(OperatorMatrix::identity(4), 0, 1, s3) - OperatorMatrix::identity(8)) == 0.0);

    const auto swap = permutation_unitary(std::vector<std::size_t>{1, 0}, FactorShape(2, 2));
    const auto e = embed_pair(swap, 0, 1, FactorShape(2, 2));
    Vector ket10 = Vector::Zero(4), ket01 = Vector::Zero(4);
    ket10(2) = 1.0;
    ket01(1) = 1.0;
    CHECK((e.mat() * ket10 - ket01).norm() == 0.0);

    std::mt19937_64 rng(5);
    const FactorShape s4(4, 2);
    const OperatorMatrix x(oracle::random_matrix(rng, 4)), y(oracle::random_matrix(rng, 4));
    const auto xa = embed_pair(x, 0, 2, s4);
    const auto yb = embed_pair(y, 1, 3, s4);
    CHECK(max_abs(commutator(xa, yb)) < 1e-12);

    SUBCASE("matches explicit product placement") {
        const OperatorMatrix a(oracle::random_matrix(rng, 2)), b(oracle::random_matrix(rng, 2));
        const auto id = OperatorMatrix::identity(2);
        // a on factor 2, b on factor 0
        const auto want = tensor(tensor(b, id), a);
        CHECK(max_abs(embed_pair(tensor(a, b), 2, 0, s3) - want) < 1e-14);
    }

    CHECK_THROWS_AS(embed_pair(x, 1, 1, s4), ValidationError);
    CHECK_THROWS_AS(embed_pair(x, 0, 4, s4), ValidationError);
    CHECK_THROWS_AS(embed_pair(OperatorMatrix::identity(8), 0, 1, s4), ValidationError);
}

TEST_CASE("partial traces") {
    std::mt19937_64 rng(7);
    const OperatorMatrix r1(oracle::random_density(rng, 2)), r2(oracle::random_density(rng, 3));
    const FactorShape mixed(2, 2);
    CHECK(max_abs(partial_trace(tensor(r1, OperatorMatrix(oracle::random_density(rng, 2))), mixed, std::size_t{1}) - r1) <
          1e-14);

    Vector bell = Vector::Zero(4);
    bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
    const auto phi = DensityMatrix::pure(bell);
    CHECK(max_abs(partial_trace(phi, FactorShape(2, 2), 1).op() - OperatorMatrix::identity(2) * cplx(0.5)) < 1e-15);

    for (std::size_t d : {2u, 3u})
        for (std::size_t n = 2; n <= (d == 2 ? 4u : 3u); ++n) {
            const FactorShape s(n, d);
            const OperatorMatrix rho(oracle::random_density(rng, s.total_dim()));
            CHECK(max_abs(partial_trace(rho, s, n) - rho) == 0.0);
            for (std::size_t k = 1; k < n; ++k) {
                const auto red = partial_trace(rho, s, k);
                CHECK(oracle::max_abs(red.mat() - oracle::trace_out_tail(rho.mat(), n, k, d)) < 1e-14);
                const OperatorMatrix a(oracle::random_hermitian(rng, red.dim()));
                const auto lifted = embed_leading(a, k, s);
                CHECK(std::abs((lifted * rho).trace() - (a * red).trace()) < 1e-12);
            }
        }
    // keep a non-leading factor
    const FactorShape s3(3, 2);
    const OperatorMatrix a(oracle::random_density(rng, 2)), b(oracle::random_density(rng, 2)), c(oracle::random_density(rng, 2));
    CHECK(max_abs(partial_trace(tensor(tensor(a, b), c), s3, std::vector<std::size_t>{1}) - b) < 1e-14);
    CHECK_THROWS_AS(partial_trace(a, s3, std::size_t{1}), ValidationError);
    CHECK_THROWS_AS(partial_trace(tensor(tensor(a, b), c), s3, std::size_t{0}), ValidationError);
}

TEST_CASE("entropies") {
    Vector psi(3);
    psi << 1.0, cplx(0.0, 1.0), 2.0;
    CHECK(std::abs(von_neumann_entropy(DensityMatrix::pure(psi))) < 1e-12);
    CHECK(von_neumann_entropy(DensityMatrix::maximally_mixed(5)) == doctest::Approx(std::log(5.0)));
    const double p[] = {2.0 / 3.0, 1.0 / 3.0};
    const double want = -(2.0 / 3.0) * std::log(2.0 / 3.0) - (1.0 / 3.0) * std::log(1.0 / 3.0);
    CHECK(von_neumann_entropy(DensityMatrix(OperatorMatrix::diagonal(p))) == doctest::Approx(want).epsilon(1e-14));
    CHECK(want == doctest::Approx(0.6365).epsilon(1e-4));

    std::mt19937_64 rng(9);
    const DensityMatrix r(OperatorMatrix(oracle::random_density(rng, 3)));
    CHECK(std::abs(relative_entropy(r, r)) < 1e-12);
    const double pure0[] = {1.0, 0.0};
    const DensityMatrix e0(OperatorMatrix::diagonal(pure0));
    CHECK(relative_entropy(e0, DensityMatrix::maximally_mixed(2)) == doctest::Approx(std::log(2.0)));
    CHECK(std::isinf(relative_entropy(DensityMatrix::maximally_mixed(2), e0)));

    for (int k = 0; k < 20; ++k) {
        const DensityMatrix a(OperatorMatrix(oracle::random_density(rng, 4)));
        const DensityMatrix b(OperatorMatrix(oracle::random_density(rng, 4)));
        const double s = von_neumann_entropy(a);
        CHECK(s >= 0.0);
        CHECK(s <= std::log(4.0) + 1e-12);
        CHECK(relative_entropy(a, b) >= -1e-12);
    }
}

TEST_CASE("density matrix validation") {
    OperatorMatrix bad(2);
    bad(0, 0) = 0.5;
    bad(1, 1) = 0.6;
    CHECK_THROWS_AS(DensityMatrix{bad}, ValidationError);
    bad(1, 1) = 0.5;
    bad(0, 1) = 0.7;
    CHECK_THROWS_AS(DensityMatrix{bad}, ValidationError);  // not Hermitian
    bad(1, 0) = 0.7;
    CHECK_THROWS_AS(DensityMatrix{bad}, ValidationError);  // not PSD
}

TEST_CASE("matrix functions reject non-Hermitian input") {
    OperatorMatrix a(2);
    a(0, 1) = 1.0;
    CHECK_THROWS_AS(hermitian_log(a), ValidationError);
    const double d[] = {1.0, std::exp(1.0)};
    const auto l = hermitian_log(OperatorMatrix::diagonal(d));
    CHECK(std::abs(l(1, 1) - 1.0) < 1e-14);
    CHECK(max_abs(hermitian_exp(l) - OperatorMatrix::diagonal(d)) < 1e-14);
}

TEST_CASE("norms and vectorisation") {
    std::mt19937_64 rng(13);
    const OperatorMatrix a(oracle::random_matrix(rng, 3));
    CHECK(max_abs(unvec(vec(a), 3) - a) == 0.0);
    CHECK(vec(a)(1) == a(0, 1));
    CHECK(trace_norm(a) == doctest::Approx(oracle::trace_norm(a.mat())));
    CHECK(operator_norm(a) <= trace_norm(a));
    CHECK(hs_norm(a) == doctest::Approx(std::sqrt(hs_inner_real(a, a))));
}

}  // TEST_SUITE
