#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "generators.hpp"
#include "oracles.hpp"
#include "pdd/nnsearch.hpp"

using namespace pdd;

namespace {

PeriodicSet z2() { return PeriodicSet(Lattice(2, {1, 0, 0, 1}), Motif(2, {{0.0, 0.0}})); }

}  // namespace

TEST_CASE("shell generator counts on the square lattice") {
    const auto set = z2();
    ShellGenerator gen(set);
    std::vector<double> cloud;
    gen.next_shell(cloud);
    CHECK(cloud.size() / 2 == 1);  // shell 0 is exactly the motif
    gen.next_shell(cloud);
    CHECK(cloud.size() / 2 == 1 + 8);
    gen.next_shell(cloud);
    CHECK(cloud.size() / 2 == 1 + 8 + 16);
}

TEST_CASE("shell 0 is the motif, in order") {
    std::mt19937 rng(3);
    const auto set = testutil::random_periodic_set(rng, 3, 4, 0.2);
    ShellGenerator gen(set);
    std::vector<double> cloud;
    gen.next_shell(cloud);
    const auto cart = to_cartesian(set);
    REQUIRE(cloud.size() == cart.size() * 3);
    for (std::size_t p = 0; p < cart.size(); ++p)
        for (int i = 0; i < 3; ++i) CHECK(cloud[p * 3 + i] == cart[p][i]);
}

TEST_CASE("shell counts with a 3-point motif") {
    PeriodicSet set(Lattice(2, {2, 0, 0, 1}),
                    Motif(2, {{0.0, 0.0}, {0.25, 0.5}, {0.5, 0.25}}));
    ShellGenerator gen(set);
    std::vector<double> cloud;
    gen.next_shell(cloud);
    cloud.clear();
    gen.next_shell(cloud);
    CHECK(cloud.size() / 2 == 24);  // 8 translates x 3 motif points
}

TEST_CASE("covered radius is non-decreasing") {
    std::mt19937 rng(5);
    const auto set = testutil::random_periodic_set(rng, 2, 2, 0.2);
    ShellGenerator gen(set);
    std::vector<double> cloud;
    double prev = -1.0;
    for (int s = 0; s < 6; ++s) {
        gen.next_shell(cloud);
        CHECK(gen.covered_radius() >= prev);
        prev = gen.covered_radius();
    }
}

TEST_CASE("trapezium fixture: ordered distances per point") {
    const FiniteSet t({{-2, 0}, {2, 0}, {-1, 1}, {1, 1}});
    const auto dm = neighbor_distances(t, 3);
    const double r2 = std::sqrt(2.0), r10 = std::sqrt(10.0);
    REQUIRE(dm.rows.size() == 4);
    CHECK(dm.rows[0] == std::vector<double>{r2, r10, 4.0});
    CHECK(dm.rows[1] == std::vector<double>{r2, r10, 4.0});
    CHECK(dm.rows[2] == std::vector<double>{r2, 2.0, r10});
    CHECK(dm.rows[3] == std::vector<double>{r2, 2.0, r10});
}

TEST_CASE("square lattice: first 8 neighbor distances") {
    const auto dm = neighbor_distances(z2(), 8);
    REQUIRE(dm.rows.size() == 1);
    const double r2 = std::sqrt(2.0);
    const std::vector<double> want{1, 1, 1, 1, r2, r2, r2, r2};
    for (int i = 0; i < 8; ++i) CHECK(dm.rows[0][i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("1D four-point set matches the tabulated distances at r=0.5") {
    const double r = 0.5;
    PeriodicSet set(Lattice(1, {8.0}),
                    Motif(1, {{0.0}, {r / 8}, {(2 + r) / 8}, {4.0 / 8}}));
    const auto dm = neighbor_distances(set, 3);
    const std::vector<std::vector<double>> want{
        {r, 2 + r, 4}, {r, 2, 4 - r}, {2 - r, 2, 2 + r}, {2 - r, 4 - r, 4}};
    REQUIRE(dm.rows.size() == 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(dm.rows[i][j] == doctest::Approx(want[i][j]).epsilon(1e-12));
}

TEST_CASE("errors: bad k and undersized finite sets") {
    CHECK_THROWS_AS(neighbor_distances(z2(), 0), InputError);
    CHECK_THROWS_AS(neighbor_distances(z2(), -3), InputError);
    const FiniteSet pair({{0.0, 0.0}, {1.0, 0.0}});
    CHECK_THROWS_AS(neighbor_distances(pair, 2), InputError);
    CHECK(neighbor_distances(pair, 1).rows[0][0] == 1.0);
}

TEST_CASE("oracle equivalence on random periodic sets") {
    std::mt19937 rng(23);
    std::uniform_int_distribution<int> kdist(1, 30);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 1 + trial % 3;
        const int m = 1 + trial % 6;
        const auto set = testutil::random_periodic_set(rng, n, m, 0.15);
        const int k = kdist(rng);
        const auto got = neighbor_distances(set, k);
        const auto want = testutil::brute_neighbor_rows(set, k);
        REQUIRE(got.rows.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i)
            for (int j = 0; j < k; ++j)
                CHECK(got.rows[i][j] == want[i][j]);  // exact match
    }
}

TEST_CASE("monotonicity in k") {
    std::mt19937 rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + trial % 3;
        const auto set = testutil::random_periodic_set(rng, n, 1 + trial % 4, 0.2);
        const int k = 5 + trial;
        const auto small = neighbor_distances(set, k);
        const auto big = neighbor_distances(set, k + 1);
        for (std::size_t i = 0; i < small.rows.size(); ++i)
            for (int j = 0; j < k; ++j) CHECK(small.rows[i][j] == big.rows[i][j]);
    }
}

TEST_CASE("lattice translation of the motif leaves distances unchanged") {
    std::mt19937 rng(31);
    const auto set = testutil::random_periodic_set(rng, 2, 3, 0.2);
    std::vector<Vec> shifted;
    for (const auto& p : set.motif().points()) {
        Vec q(p);
        q[0] = wrap_unit(q[0] + 2.0);  // translate by 2 * basis vector 0, re-wrap
        q[1] = wrap_unit(q[1] - 1.0);
        shifted.push_back(q);
    }
    PeriodicSet moved(set.lattice(), Motif(2, shifted));
    const auto a = neighbor_distances(set, 12);
    const auto b = neighbor_distances(moved, 12);
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        for (int j = 0; j < 12; ++j)
            CHECK(a.rows[i][j] == doctest::Approx(b.rows[i][j]).epsilon(1e-12));
}

TEST_CASE("rows are positive and sorted") {
    std::mt19937 rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        const auto set = testutil::random_periodic_set(rng, 2, 4, 0.15);
        const auto dm = neighbor_distances(set, 15);
        for (const auto& row : dm.rows) {
            CHECK(row.front() > 0.0);
            for (std::size_t j = 0; j + 1 < row.size(); ++j) CHECK(row[j] <= row[j + 1]);
        }
    }
}
