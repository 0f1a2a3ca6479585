#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "generators.hpp"
#include "oracles.hpp"
#include "pdd/metrics.hpp"
#include "pdd/reconstruct.hpp"

using namespace pdd;

namespace {

Lattice z2() { return Lattice(2, {1, 0, 0, 1}); }
Lattice z3() { return Lattice(3, {1, 0, 0, 0, 1, 0, 0, 0, 1}); }
Lattice rect21() { return Lattice(2, {2, 0, 0, 1}); }

bool contains_point(const std::vector<Vec>& pts, const Vec& p, double tol = 1e-9) {
    for (const auto& q : pts)
        if (dist(p, q) <= tol) return true;
    return false;
}

// k large enough that every row covers the given radius
int pick_k(const PeriodicSet& set, double radius) {
    int k = 8;
    while (k < 20000) {
        const auto dm = neighbor_distances(set, k);
        double min_last = dm.rows[0].back();
        for (const auto& r : dm.rows) min_last = std::min(min_last, r.back());
        if (min_last > radius) return k;
        k = k * 3 / 2 + 4;
    }
    throw std::runtime_error("pick_k: radius unreachable");
}

pdd::PeriodicSet random_generic_set(std::mt19937& rng, int n, int m) {
    for (int attempt = 0; attempt < 60; ++attempt) {
        auto set = testutil::random_periodic_set(rng, n, m, 0.3);
        if (check_distance_generic(set).is_generic) return set;
    }
    throw std::runtime_error("no generic set found");
}

// explicit isometry: reconstructed = +-(original - p_j) modulo the lattice
bool isometric_via_base_and_flip(const PeriodicSet& original, const PeriodicSet& rebuilt,
                                 double tol = 1e-6) {
    if (original.motif_size() != rebuilt.motif_size()) return false;
    const auto oc = to_cartesian(original);
    const auto rc = to_cartesian(rebuilt);
    const int m = original.motif_size();
    for (int base = 0; base < m; ++base) {
        for (double sign : {1.0, -1.0}) {
            std::vector<char> used(m, 0);
            bool all = true;
            for (int i = 0; i < m && all; ++i) {
                bool matched = false;
                for (int j = 0; j < m && !matched; ++j) {
                    if (used[j]) continue;
                    Vec d(original.dim());
                    for (int c = 0; c < original.dim(); ++c)
                        d[c] = sign * (oc[i][c] - oc[base][c]) - rc[j][c];
                    if (norm(min_norm_representative(original.lattice(), d)) <= tol) {
                        used[j] = 1;
                        matched = true;
                    }
                }
                all = matched;
            }
            if (all) return true;
        }
    }
    return false;
}

}  // namespace

TEST_CASE("covering radius fixtures") {
    CHECK(covering_radius(z2()) == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-9));
    CHECK(covering_radius(z3()) == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-9));
    CHECK(covering_radius(rect21()) == doctest::Approx(std::sqrt(5.0) / 2).epsilon(1e-9));
}

TEST_CASE("covering radius is invariant under unimodular rewrites") {
    // same lattice via a sheared basis
    const Lattice sheared(2, {1, 0, 3, 1});
    CHECK(covering_radius(sheared) == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-9));
}

TEST_CASE("neighbor set of the square lattice") {
    const auto nset = neighbor_set(z2());
    REQUIRE(nset.points.size() == 4);
    CHECK(contains_point(nset.points, {1, 0}));
    CHECK(contains_point(nset.points, {-1, 0}));
    CHECK(contains_point(nset.points, {0, 1}));
    CHECK(contains_point(nset.points, {0, -1}));
    CHECK(nset.radius == doctest::Approx(1.0));
}

TEST_CASE("neighbor set of the (2,0),(0,1) lattice includes the third neighbors") {
    const auto nset = neighbor_set(rect21());
    CHECK(contains_point(nset.points, {0, 2}));
    CHECK(contains_point(nset.points, {0, -2}));
    CHECK(contains_point(nset.points, {2, 0}));
    CHECK(contains_point(nset.points, {0, 1}));
}

TEST_CASE("neighbor set stays within twice the covering radius") {
    std::mt19937 rng(301);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + trial % 2;
        const auto lat = testutil::random_lattice(rng, n);
        const auto nset = neighbor_set(lat);
        const double bound = 2.0 * covering_radius(lat) * (1.0 + 1e-6);
        for (const auto& p : nset.points) {
            CHECK(norm(p) <= bound);
            CHECK(contains_point(nset.points, Vec{-p[0], n == 3 ? -p[1] : -p[1]}, 1e-9));
        }
        // central symmetry
        for (const auto& p : nset.points) {
            Vec neg(p);
            for (double& c : neg) c = -c;
            CHECK(contains_point(nset.points, neg, 1e-9));
        }
    }
}

TEST_CASE("basis distances: worked rectangle example") {
    const auto nset = neighbor_set(rect21());
    const auto bd = basis_distances({0.0, 0.4}, nset, rect21());
    REQUIRE(bd.distances.size() == 2);
    CHECK(bd.distances[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(bd.distances[1] == doctest::Approx(std::sqrt(0.4 * 0.4 + 4.0)).epsilon(1e-12));
    CHECK(dist(bd.points[0], {0, 1}) <= 1e-12);
}

TEST_CASE("basis distances: square lattice via exhaustive oracle") {
    const auto nset = neighbor_set(z2());
    const Vec q{0.1, 0.2};
    const auto bd = basis_distances(q, nset, z2());
    // oracle: enumerate all independent pairs from the neighbor set
    std::vector<double> best{1e300, 1e300};
    for (const auto& a : nset.points)
        for (const auto& b : nset.points) {
            if (std::abs(a[0] * b[1] - a[1] * b[0]) < 1e-12) continue;
            std::vector<double> d{dist(q, a), dist(q, b)};
            std::sort(d.begin(), d.end());
            if (d < best) best = d;
        }
    CHECK(bd.distances[0] == doctest::Approx(best[0]).epsilon(1e-12));
    CHECK(bd.distances[1] == doctest::Approx(best[1]).epsilon(1e-12));
}

TEST_CASE("basis distances: invariance under relabeling and central symmetry") {
    std::mt19937 rng(307);
    for (int trial = 0; trial < 10; ++trial) {
        const auto lat = testutil::random_lattice(rng, 2);
        auto nset = neighbor_set(lat);
        const VoronoiCell cell = voronoi_cell(lat);
        std::uniform_real_distribution<double> u(-0.3, 0.3);
        Vec q{u(rng), u(rng)};
        if (cell_margin(cell, q) < 1e-6) continue;
        const auto bd = basis_distances(q, nset, lat);
        // shuffle the neighbor set
        std::shuffle(nset.points.begin(), nset.points.end(), rng);
        const auto bd2 = basis_distances(q, nset, lat);
        CHECK(bd.distances == bd2.distances);
        // central symmetry: q -> -q with the (symmetric) neighbor set
        Vec neg{-q[0], -q[1]};
        const auto bd3 = basis_distances(neg, nset, lat);
        for (int i = 0; i < 2; ++i)
            CHECK(bd.distances[i] == doctest::Approx(bd3.distances[i]).epsilon(1e-9));
    }
}

TEST_CASE("basis distances rejects points outside the open domain") {
    const auto nset = neighbor_set(z2());
    CHECK_THROWS_AS(basis_distances({0.0, 0.0}, nset, z2()), InputError);  // the lattice point
    CHECK_THROWS_AS(basis_distances({0.5, 0.0}, nset, z2()), InputError);  // on the boundary
    CHECK_THROWS_AS(basis_distances({0.9, 0.0}, nset, z2()), InputError);  // another domain
}

TEST_CASE("genericity: collinear half-period motif violates (b)") {
    PeriodicSet set(z2(), Motif(2, {{0.0, 0.0}, {0.5, 0.0}}));
    const auto report = check_distance_generic(set);
    CHECK(!report.is_generic);
    bool has_b = false;
    for (const auto& v : report.violations) has_b |= v.condition == 'b';
    CHECK(has_b);
}

TEST_CASE("genericity: exactly orthogonal motif vectors violate (a)") {
    // third point orthogonal to the second, viewed from the first; cell large
    // enough that both vectors stay within the Voronoi domain
    PeriodicSet set3(Lattice(2, {10, 0, 0, 10}),
                     Motif(2, {{0.0, 0.0}, {0.013, 0.0}, {0.0, 0.017}}));
    const auto report = check_distance_generic(set3);
    CHECK(!report.is_generic);
    bool has_a = false;
    for (const auto& v : report.violations) has_a |= v.condition == 'a';
    CHECK(has_a);
}

TEST_CASE("genericity: random perturbed sets are generic with high probability") {
    std::mt19937 rng(311);
    int generic = 0, total = 0;
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 2 + trial % 2;
        const auto set = testutil::random_periodic_set(rng, n, 2 + trial % 2, 0.3);
        ++total;
        if (check_distance_generic(set).is_generic) ++generic;
    }
    CHECK(generic >= total - 2);
}

TEST_CASE("genericity report serializes to JSON") {
    PeriodicSet set(z2(), Motif(2, {{0.0, 0.0}, {0.5, 0.0}}));
    const auto report = check_distance_generic(set);
    const auto json = genericity_report_to_json(report);
    CHECK(json.find("\"is_generic\": false") != std::string::npos);
    CHECK(json.find("\"condition\"") != std::string::npos);
}

TEST_CASE("checker allows lattice-vector repeats from non-primitive descriptions") {
    std::mt19937 rng(313);
    const auto set = random_generic_set(rng, 2, 2);
    const auto doubled = testutil::supercell(set, 0, 2);
    CHECK(check_distance_generic(doubled).is_generic);
}

TEST_CASE("reconstruction: single-orbit motif is the origin") {
    const auto rebuilt = reconstruct_motif(z2(), 1, pdd::pdd(PeriodicSet(z2(), Motif(2, {{0, 0}})), 8));
    CHECK(rebuilt.motif_size() == 1);
    CHECK(rebuilt.motif().point(0) == Vec{0.0, 0.0});
}

TEST_CASE("reconstruction rejects k too small for the covering radius") {
    std::mt19937 rng(317);
    const auto set = random_generic_set(rng, 2, 3);
    const auto matrix = pdd::pdd(set, 3);
    CHECK_THROWS_WITH_AS(reconstruct_motif(set.lattice(), 3, matrix), doctest::Contains("k too small"),
                         InputError);
}

TEST_CASE("round trip: random generic 2D sets") {
    std::mt19937 rng(331);
    for (int trial = 0; trial < 6; ++trial) {
        const int m = 2 + trial % 3;
        const auto set = random_generic_set(rng, 2, m);
        const double R = covering_radius(set.lattice());
        const double rN = neighbor_set(set.lattice()).radius;
        const int k = pick_k(set, std::max(2.0 * R, R + rN) * 1.1);
        const auto matrix = pdd::pdd(set, k);
        ReconstructionTrace trace;
        const auto rebuilt = reconstruct_motif(set.lattice(), m, matrix, &trace);
        CHECK(rebuilt.motif_size() == m);
        CHECK(emd(matrix, pdd::pdd(rebuilt, k)).distance <= 1e-6);
        CHECK(isometric_via_base_and_flip(set, rebuilt));
        CHECK(trace.placements.size() == static_cast<std::size_t>(m - 1));
    }
}

TEST_CASE("round trip: random generic 3D sets") {
    std::mt19937 rng(337);
    for (int trial = 0; trial < 3; ++trial) {
        const int m = 2 + trial % 2;
        const auto set = random_generic_set(rng, 3, m);
        const double R = covering_radius(set.lattice());
        const double rN = neighbor_set(set.lattice()).radius;
        const int k = pick_k(set, std::max(2.0 * R, R + rN) * 1.1);
        const auto matrix = pdd::pdd(set, k);
        const auto rebuilt = reconstruct_motif(set.lattice(), m, matrix);
        CHECK(emd(matrix, pdd::pdd(rebuilt, k)).distance <= 1e-6);
        CHECK(isometric_via_base_and_flip(set, rebuilt));
    }
}

TEST_CASE("reconstruction errors on bad weights and unrealizable input") {
    // weights 1/3 + 2/3 cannot expand to m = 2 rows of weight 1/2
    PDDMatrix thirds(8, {{Rational(1, 3), {1, 1, 1, 1, 2, 2, 2, 2}},
                         {Rational(2, 3), {1, 1, 1, 1, 2, 2, 2, 3}}});
    CHECK_THROWS_AS(reconstruct_motif(z2(), 2, thirds), InputError);
    PDDMatrix single(8, {{Rational(1), {1, 1, 1, 1, 2, 2, 2, 2}}});
    CHECK_THROWS_AS(reconstruct_motif(z2(), 0, single), InputError);
    // three coinciding rows are expandable but not realizable
    CHECK_THROWS_AS(reconstruct_motif(z2(), 3, single), NumericError);
}

TEST_CASE("trace serializes to JSON") {
    std::mt19937 rng(347);
    const auto set = random_generic_set(rng, 2, 2);
    const double R = covering_radius(set.lattice());
    const double rN = neighbor_set(set.lattice()).radius;
    const int k = pick_k(set, std::max(2.0 * R, R + rN) * 1.1);
    ReconstructionTrace trace;
    reconstruct_motif(set.lattice(), 2, pdd::pdd(set, k), &trace);
    const auto json = trace_to_json(trace);
    CHECK(json.find("\"covering_radius\"") != std::string::npos);
    CHECK(json.find("\"placements\"") != std::string::npos);
}
