#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>

#include "generators.hpp"
#include "oracles.hpp"
#include "pdd/pipeline.hpp"

using namespace pdd;

namespace {

PeriodicSet labeled(PeriodicSet set, const std::string& label) {
    return PeriodicSet(set.lattice(), set.motif(), label);
}

std::vector<PeriodicSet> random_store_sets(std::mt19937& rng, int count, int n = 2) {
    std::vector<PeriodicSet> sets;
    for (int i = 0; i < count; ++i)
        sets.push_back(labeled(testutil::random_periodic_set(rng, n, 1 + i % 3, 0.2),
                               "r" + std::to_string(100 + i)));
    return sets;
}

PeriodicSet s_of(double r, const std::string& label) {
    return PeriodicSet(Lattice(1, {8.0}),
                       Motif(1, {{0.0}, {r / 8}, {(2 + r) / 8}, {4.0 / 8}}), label);
}

PeriodicSet q_of(double r, const std::string& label) {
    return PeriodicSet(Lattice(1, {8.0}),
                       Motif(1, {{0.0}, {(2 + r) / 8}, {4.0 / 8}, {(4 + r) / 8}}), label);
}

}  // namespace

TEST_CASE("store enforces unique labels and a common k") {
    std::mt19937 rng(401);
    auto sets = random_store_sets(rng, 2);
    auto store = build_store(sets, 10);
    CHECK(store.size() == 2);
    CHECK(store.k() == 10);
    CHECK(store.find("r100") != nullptr);
    CHECK(store.find("nope") == nullptr);
    InvariantRecord copy = store.record(0);
    CHECK_THROWS_AS(store.add(copy), InputError);  // duplicate label
    InvariantStore other(9);
    CHECK_THROWS_AS(other.add(copy), InputError);  // mixed k
    sets.push_back(labeled(sets[0], "r100"));
    CHECK_THROWS_AS(build_store(sets, 10), InputError);
}

TEST_CASE("scan finds an isometric copy and nothing else") {
    std::mt19937 rng(409);
    const auto base = testutil::random_periodic_set(rng, 2, 3, 0.25);
    std::vector<PeriodicSet> sets;
    sets.push_back(labeled(base, "orig"));
    sets.push_back(labeled(testutil::transform(base, rng, true), "copy"));
    sets.push_back(labeled(testutil::random_periodic_set(rng, 2, 3, 0.25), "other"));
    const auto store = build_store(sets, 25, 1e-10);
    const auto report = scan_duplicates(store, 0.01, 0.01);
    REQUIRE(report.pairs.size() == 1);
    CHECK(report.pairs[0].label_a == "copy");
    CHECK(report.pairs[0].label_b == "orig");
    CHECK(report.pairs[0].emd <= 1e-9);
}

TEST_CASE("the 1D counterexample pair is rejected by the exact stage") {
    const auto store =
        build_store({s_of(0.5, "s"), q_of(0.5, "q")}, 8);
    // by hand: the AMD gap is r/2 = 0.25, so stage 1 already rejects at 0.01;
    // the exact distance is even larger, so no pair survives either way
    const auto report = scan_duplicates(store, 0.01, 0.01);
    CHECK(report.pairs.empty());
    const double d = emd(store.record(0).pdd, store.record(1).pdd).distance;
    CHECK(d > 0.01);
}

TEST_CASE("scan equals brute-force all-pairs thresholding") {
    std::mt19937 rng(419);
    for (double t : {0.05, 0.3, 1.0}) {
        auto sets = random_store_sets(rng, 18);
        // sprinkle in near-duplicates so the report is not trivially empty
        sets.push_back(labeled(testutil::transform(sets[0], rng, false), "r900"));
        sets.push_back(labeled(testutil::transform(sets[3], rng, true), "r901"));
        const auto store = build_store(sets, 12, 1e-10);
        const auto report = scan_duplicates(store, t, t);

        std::vector<std::tuple<std::string, std::string, double>> brute;
        for (int i = 0; i < store.size(); ++i)
            for (int j = i + 1; j < store.size(); ++j) {
                const double d = emd(store.record(i).pdd, store.record(j).pdd).distance;
                if (d <= t) {
                    auto a = store.record(i).label, b = store.record(j).label;
                    if (b < a) std::swap(a, b);
                    brute.emplace_back(a, b, d);
                }
            }
        REQUIRE(report.pairs.size() == brute.size());
        std::sort(brute.begin(), brute.end(), [](const auto& x, const auto& y) {
            return std::tie(std::get<2>(x), std::get<0>(x), std::get<1>(x)) <
                   std::tie(std::get<2>(y), std::get<0>(y), std::get<1>(y));
        });
        for (std::size_t p = 0; p < brute.size(); ++p) {
            CHECK(report.pairs[p].label_a == std::get<0>(brute[p]));
            CHECK(report.pairs[p].label_b == std::get<1>(brute[p]));
            CHECK(report.pairs[p].emd == std::get<2>(brute[p]));
        }
    }
}

TEST_CASE("scan validates thresholds and store size") {
    std::mt19937 rng(421);
    const auto store = build_store(random_store_sets(rng, 2), 8);
    CHECK_THROWS_AS(scan_duplicates(store, -0.1, 0.01), InputError);
    CHECK_THROWS_AS(scan_duplicates(store, 0.01, -1.0), InputError);
    // amd threshold below the emd threshold is raised, not trusted
    const auto report = scan_duplicates(store, 1e-6, 0.5);
    CHECK(report.amd_threshold == 0.5);
}

TEST_CASE("threshold zero keeps only exact-invariant pairs") {
    std::mt19937 rng(423);
    auto sets = random_store_sets(rng, 3);
    // a byte-identical twin: same motif and lattice under a new label
    sets.push_back(labeled(sets[1], "exact_twin"));
    const auto store = build_store(sets, 8);
    const auto report = scan_duplicates(store, 0.0, 0.0);
    REQUIRE(report.pairs.size() == 1);
    CHECK(report.pairs[0].emd == 0.0);
    CHECK(report.pairs[0].label_b == "r101");
}

TEST_CASE("mst on three records is the cheapest pair of edges") {
    std::mt19937 rng(431);
    const auto store = build_store(random_store_sets(rng, 3), 10);
    const auto mst = build_mst(store, 2);
    REQUIRE(mst.edges.size() == 2);
    // exhaustive: three possible spanning trees
    std::vector<std::vector<double>> w(3, std::vector<double>(3, 0.0));
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            w[i][j] = w[j][i] = emd(store.record(i).pdd, store.record(j).pdd).distance;
    const double best = std::min({w[0][1] + w[0][2], w[0][1] + w[1][2], w[0][2] + w[1][2]});
    CHECK(mst.edges[0].emd + mst.edges[1].emd == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("mst weight matches the exhaustive spanning-tree oracle") {
    std::mt19937 rng(433);
    for (int trial = 0; trial < 5; ++trial) {
        const auto store = build_store(random_store_sets(rng, 5), 8);
        const auto mst = build_mst(store, 4);  // complete candidate graph
        CHECK(!mst.approximate);
        std::vector<std::vector<double>> w(5, std::vector<double>(5, 0.0));
        for (int i = 0; i < 5; ++i)
            for (int j = i + 1; j < 5; ++j)
                w[i][j] = w[j][i] = emd(store.record(i).pdd, store.record(j).pdd).distance;
        double got = 0.0;
        for (const auto& e : mst.edges) got += e.emd;
        CHECK(got == doctest::Approx(testutil::mst_weight_by_enumeration(5, w)).epsilon(1e-10));
    }
}

TEST_CASE("isometric copies join through a zero-weight edge") {
    std::mt19937 rng(439);
    const auto base = testutil::random_periodic_set(rng, 2, 2, 0.25);
    std::vector<PeriodicSet> sets = random_store_sets(rng, 3);
    sets.push_back(labeled(base, "twin_a"));
    sets.push_back(labeled(testutil::transform(base, rng, false), "twin_b"));
    const auto store = build_store(sets, 15, 1e-10);
    const auto mst = build_mst(store, static_cast<int>(sets.size()) - 1);
    bool found = false;
    for (const auto& e : mst.edges)
        if (e.label_a == "twin_a" && e.label_b == "twin_b" && e.emd <= 1e-9) found = true;
    CHECK(found);
}

TEST_CASE("mst with tight candidate pruning still spans and is marked approximate") {
    std::mt19937 rng(443);
    const auto store = build_store(random_store_sets(rng, 9), 8);
    const auto mst = build_mst(store, 1);
    CHECK(mst.approximate);
    CHECK(mst.edges.size() == 8);  // spanning despite the sparse candidate graph
}

TEST_CASE("results are deterministic across worker counts and insertion order") {
    std::mt19937 rng(449);
    auto sets = random_store_sets(rng, 10);
    const auto store1 = build_store(sets, 10, 0.0, 1);
    const auto store4 = build_store(sets, 10, 0.0, 4);
    const auto report1 = scan_duplicates(store1, 0.6, 0.6, 1);
    const auto report4 = scan_duplicates(store4, 0.6, 0.6, 4);
    CHECK(report_to_csv(report1) == report_to_csv(report4));
    const auto mst1 = build_mst(store1, 4, 1);
    const auto mst4 = build_mst(store4, 4, 4);
    CHECK(mst_to_csv(mst1) == mst_to_csv(mst4));

    // insertion order must not matter for the tree
    std::reverse(sets.begin(), sets.end());
    const auto store_rev = build_store(sets, 10, 0.0, 2);
    const auto mst_rev = build_mst(store_rev, 9, 2);
    const auto mst_fwd = build_mst(store1, 9, 3);
    CHECK(mst_to_csv(mst_rev) == mst_to_csv(mst_fwd));
}

TEST_CASE("store persistence round trip") {
    std::mt19937 rng(457);
    auto sets = random_store_sets(rng, 4);
    std::vector<Provenance> prov;
    for (int i = 0; i < 4; ++i) prov.push_back({"file" + std::to_string(i) + ".cif", "block"});
    const auto store = build_store(sets, 7, 0.0, 0, &prov);
    const auto dir = std::filesystem::temp_directory_path() / "pdd_store_test";
    std::filesystem::remove_all(dir);
    save_store(store, dir.string());
    const auto back = load_store(dir.string());
    REQUIRE(back.size() == store.size());
    CHECK(back.k() == store.k());
    for (int i = 0; i < store.size(); ++i) {
        CHECK(back.record(i).label == store.record(i).label);
        CHECK(back.record(i).ppc == store.record(i).ppc);  // bit-exact
        CHECK(back.record(i).pdd == store.record(i).pdd);
        CHECK(back.record(i).amd.values() == store.record(i).amd.values());
        CHECK(back.record(i).provenance.source == store.record(i).provenance.source);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("report and mst serializers") {
    std::mt19937 rng(461);
    const auto store = build_store(random_store_sets(rng, 4), 8);
    const auto report = scan_duplicates(store, 1.0, 1.0);
    const auto csv = report_to_csv(report);
    CHECK(csv.rfind("label_a,label_b,amd_gap,emd\n", 0) == 0);
    const auto json = report_to_json(report);
    CHECK(json.find("\"emd_threshold\": 1.0") != std::string::npos);
    const auto mst = build_mst(store, 3);
    const auto mcsv = mst_to_csv(mst);
    CHECK(std::count(mcsv.begin(), mcsv.end(), '\n') == 4);  // header + 3 edges
    const auto mjson = mst_to_json(mst, store);
    CHECK(mjson.find("\"nodes\"") != std::string::npos);
    CHECK(mjson.find("\"approximate\"") != std::string::npos);
}
