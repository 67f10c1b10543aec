#include <doctest.h>

#include <algorithm>

#include "../oracles.hpp"
#include "qkac/spectra.hpp"

using namespace qkac;

namespace {

std::map<long long, std::size_t> counts_of(const SingleParticleModel& m, std::size_t n) {
    std::map<long long, std::size_t> out;
    for (const auto& p : classify_all(m, n)) out[p.energy] = p.class_count();
    return out;
}

std::vector<long long> as_ll(const std::vector<Energy>& e) { return {e.begin(), e.end()}; }

}  // namespace

TEST_SUITE("spectra") {

TEST_CASE("model validation") {
    CHECK_THROWS_AS(SingleParticleModel({1}), ValidationError);
    CHECK_THROWS_AS(SingleParticleModel({2, 1}), ValidationError);
    const SingleParticleModel m({0, 1, 1, 3});
    CHECK(m.distinct_energies() == std::vector<Energy>{0, 1, 3});
}

TEST_CASE("shell decomposition") {
    const SingleParticleModel qubit({0, 1});
    auto sh = shell_decomposition(qubit, 3);
    REQUIRE(sh.size() == 4);
    const std::size_t want3[] = {1, 3, 3, 1};
    for (std::size_t e = 0; e < 4; ++e) {
        CHECK(sh[e].energy == Energy(e));
        CHECK(sh[e].indices.size() == want3[e]);
    }

    sh = shell_decomposition(qubit, 1);
    REQUIRE(sh.size() == 2);
    CHECK(sh[0].indices == std::vector<std::size_t>{0});
    CHECK(sh[1].indices == std::vector<std::size_t>{1});

    const SingleParticleModel osc({0, 1, 2});
    sh = shell_decomposition(osc, 2);
    REQUIRE(sh.size() == 5);
    const std::size_t want[] = {1, 2, 3, 2, 1};
    for (std::size_t e = 0; e < 5; ++e) CHECK(sh[e].indices.size() == want[e]);

    SUBCASE("partition of all multi-indices") {
        for (std::size_t n = 1; n <= 4; ++n) {
            const SingleParticleModel m({0, 2, 5});
            std::vector<std::size_t> all;
            for (const auto& s : shell_decomposition(m, n)) {
                for (auto f : s.indices) {
                    long long e = 0;
                    for (auto a : oracle::digits(f, n, 3)) e += m.energy(a);
                    CHECK(e == s.energy);
                }
                all.insert(all.end(), s.indices.begin(), s.indices.end());
            }
            std::sort(all.begin(), all.end());
            CHECK(all.size() == FactorShape(n, 3).total_dim());
            for (std::size_t f = 0; f < all.size(); ++f) CHECK(all[f] == f);
        }
    }
    CHECK_THROWS_AS(shell_decomposition(osc, 8), ValidationError);
}

TEST_CASE("shell projectors and states") {
    const SingleParticleModel qubit({0, 1});
    const auto p1 = shell_projector(qubit, 2, 1);
    Matrix want = Matrix::Zero(4, 4);
    want(1, 1) = want(2, 2) = 1.0;  // |10> and |01> in swapped order
    CHECK(oracle::max_abs(p1.mat() - oracle::swapped_to_internal(want)) == 0.0);

    const SingleParticleModel m({0, 1, 2});
    OperatorMatrix sum(27);
    for (const auto& s : shell_decomposition(m, 3)) {
        const auto p = shell_projector(m, 3, s.energy);
        CHECK(max_abs(p * p - p) == 0.0);
        sum = sum + p;
        const auto sigma = shell_state(m, 3, s.energy);
        CHECK(std::abs(sigma.op().trace() - 1.0) < 1e-14);
    }
    CHECK(max_abs(sum - OperatorMatrix::identity(27)) == 0.0);
    CHECK_THROWS_AS(shell_projector(m, 3, 7), ValidationError);
}

TEST_CASE("occupancy") {
    const std::size_t a[] = {0, 0, 1};
    CHECK(occupancy(a, 2) == OccupancyVector{2, 1});
    const std::size_t c[] = {2, 2, 2, 2};
    CHECK(occupancy(c, 3) == OccupancyVector{0, 0, 4});

    std::mt19937_64 rng(1);
    const std::vector<Energy> e{0, 3, 7, 8};
    std::uniform_int_distribution<std::size_t> pick(0, 3);
    for (int t = 0; t < 50; ++t) {
        std::vector<std::size_t> alpha(6);
        Energy direct = 0;
        for (auto& x : alpha) {
            x = pick(rng);
            direct += e[x];
        }
        const auto m = occupancy(alpha, 4);
        Energy via = 0;
        std::size_t total = 0;
        for (std::size_t j = 0; j < 4; ++j) {
            via += Energy(m[j]) * e[j];
            total += m[j];
        }
        CHECK(via == direct);
        CHECK(total == 6);
    }
}

TEST_CASE("adjacency classes agree with the raw enumeration") {
    const std::vector<std::vector<Energy>> models{{0, 1}, {0, 1, 2}, {0, 1, 3}, {0, 1, 2, 3}, {1, 10, 100}, {0, 2, 3}};
    for (const auto& e : models)
        for (std::size_t n = 1; n <= 4; ++n) {
            if (FactorShape(n, e.size(), 1u << 20).total_dim() > 256) continue;
            CAPTURE(n);
            CHECK(counts_of(SingleParticleModel(e), n) == oracle::bfs_class_counts(as_ll(e), n));
        }
}

TEST_CASE("worked classification examples") {
    const SingleParticleModel four({0, 1, 2, 3});
    CHECK(classify_shell(four, 3, 4).class_count() == 1);
    // E = 6 at N = 4 is connected through 0 + 3 = 1 + 2
    CHECK(classify_shell(four, 4, 6).class_count() == oracle::bfs_class_counts({0, 1, 2, 3}, 4).at(6));

    const SingleParticleModel indep({1, 10, 100});
    for (const auto& p : classify_all(indep, 3)) {
        CHECK(p.class_count() == p.class_occupancies.size());
        for (const auto& c : p.class_occupancies) CHECK(c.size() == 1);
    }
    CHECK_FALSE(is_fully_ergodic(indep, 3).accidental_degeneracy);
    CHECK(is_fully_ergodic(SingleParticleModel({0, 1, 3}), 3).accidental_degeneracy);

    const SingleParticleModel osc({0, 1, 2});
    for (std::size_t n = 1; n <= 6; ++n) CHECK(is_fully_ergodic(osc, n).fully_ergodic);
    for (std::size_t n = 1; n <= 8; ++n) CHECK(is_fully_ergodic(SingleParticleModel({0, 1}), n).fully_ergodic);

    SUBCASE("a multi-class shell") {
        // 0 + 3 = 1 + 2 is impossible with levels 0,1,3; shell E=3 at N=3 splits
        const SingleParticleModel gap({0, 1, 3});
        const auto r = is_fully_ergodic(gap, 3);
        CHECK_FALSE(r.fully_ergodic);
        const auto p = classify_shell(gap, 3, 3);
        CHECK(p.class_count() == 2);
    }

    SUBCASE("report rows") {
        const auto r = is_fully_ergodic(four, 3);
        std::size_t dims = 0;
        for (const auto& row : r.shells) {
            dims += row.dim;
            CHECK(row.class_count >= 1);
            CHECK(row.class_count <= row.occupancy_count);
        }
        CHECK(dims == 64);
    }
}

TEST_CASE("classes are invariant under index permutations") {
    const SingleParticleModel m({0, 1, 3});
    const std::size_t n = 3;
    const FactorShape s(n, 3);
    std::vector<std::size_t> pi{0, 1, 2};
    for (const auto& p : classify_all(m, n))
        for (const auto& cls : p.classes) {
            std::vector<std::size_t> sorted = cls;
            std::sort(sorted.begin(), sorted.end());
            std::vector<std::size_t> perm{0, 1, 2};
            do {
                for (auto f : cls) {
                    const auto a = s.digits(f);
                    std::vector<std::size_t> b(n);
                    for (std::size_t k = 0; k < n; ++k) b[k] = a[perm[k]];
                    CHECK(std::binary_search(sorted.begin(), sorted.end(), s.flat(b)));
                }
            } while (std::next_permutation(perm.begin(), perm.end()));
        }
}

TEST_CASE("commutant projection") {
    const SingleParticleModel qubit({0, 1});
    Matrix e10 = Matrix::Zero(4, 4);
    e10(1, 1) = 1.0;
    const DensityMatrix rho{OperatorMatrix(oracle::swapped_to_internal(e10))};
    const auto out = commutant_projection(qubit, 2, rho);
    Matrix want = Matrix::Zero(4, 4);
    want(1, 1) = want(2, 2) = 0.5;
    CHECK(oracle::max_abs(out.op().mat() - oracle::swapped_to_internal(want)) < 1e-15);

    std::mt19937_64 rng(21);
    for (const auto& e : std::vector<std::vector<Energy>>{{0, 1}, {0, 1, 3}}) {
        const SingleParticleModel m(e);
        const std::size_t n = e.size() == 2 ? 3 : 2;
        const std::size_t dim = FactorShape(n, e.size()).total_dim();
        const OperatorMatrix x(oracle::random_matrix(rng, dim)), y(oracle::random_matrix(rng, dim));
        const auto px = commutant_projection(m, n, x);
        CHECK(max_abs(commutant_projection(m, n, px) - px) < 1e-13);
        CHECK(std::abs(px.trace() - x.trace()) < 1e-12);
        CHECK(std::abs(hs_inner(y, px) - hs_inner(commutant_projection(m, n, y), x)) < 1e-11);
        // diagonal in the product basis
        CHECK(oracle::max_abs(px.mat() - Matrix(px.mat().diagonal().asDiagonal())) == 0.0);

        const DensityMatrix r{OperatorMatrix(oracle::random_density(rng, dim))};
        const auto pr = commutant_projection(m, n, r);
        CHECK(oracle::min_eigenvalue(pr.op().mat()) >= -1e-14);

        for (const auto& c : class_states(m, n)) CHECK(max_abs(commutant_projection(m, n, c).op() - c.op()) < 1e-14);
    }
}

}  // TEST_SUITE
