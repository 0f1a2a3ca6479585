#include "pdd/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "pdd/ingest.hpp"

namespace pdd {

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

InvariantStore::InvariantStore(int k) : k_(k) {
    if (k_ < 1) throw InputError("store requires k >= 1");
}

const InvariantRecord* InvariantStore::find(const std::string& label) const {
    const auto it = index_.find(label);
    return it == index_.end() ? nullptr : &records_[it->second];
}

void InvariantStore::add(InvariantRecord record) {
    if (record.pdd.k() != k_ || record.amd.k() != k_)
        throw InputError("record neighbor count does not match the store");
    if (index_.count(record.label))
        throw InputError("duplicate record label: " + record.label);
    index_[record.label] = static_cast<int>(records_.size());
    records_.push_back(std::move(record));
}

InvariantStore build_store(const std::vector<PeriodicSet>& sets, int k, double collapse_tol,
                           int workers, const std::vector<Provenance>* provenance) {
    if (provenance && provenance->size() != sets.size())
        throw InputError("provenance list does not match structure count");
    std::vector<std::optional<InvariantRecord>> slots(sets.size());
    parallel_for(static_cast<int>(sets.size()), workers, [&](int i) {
        PDDMatrix matrix = pdd(sets[i], k, collapse_tol);
        slots[i] = InvariantRecord{sets[i].label(), amd(matrix), std::move(matrix), ppc(sets[i]),
                                   provenance ? (*provenance)[i] : Provenance{}};
    });
    InvariantStore store(k);
    for (auto& rec : slots) store.add(std::move(*rec));
    return store;
}

DuplicateReport scan_duplicates(const InvariantStore& store, double amd_threshold,
                                double emd_threshold, int workers) {
    if (store.size() == 0) throw InputError("scan over an empty store");
    // threshold 0 is the degenerate case: only exact-invariant pairs survive
    if (amd_threshold < 0.0 || emd_threshold < 0.0)
        throw InputError("scan thresholds must be non-negative");

    DuplicateReport report;
    report.emd_threshold = emd_threshold;
    report.amd_threshold = std::max(amd_threshold, emd_threshold);

    // stage 1: AMD gaps for all pairs
    const int n = store.size();
    std::vector<std::pair<int, int>> candidates;
    std::vector<double> gaps;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double gap = amd_distance(store.record(i).amd, store.record(j).amd);
            if (gap <= report.amd_threshold) {
                candidates.emplace_back(i, j);
                gaps.push_back(gap);
            }
        }

    // stage 2: exact EMD on the survivors
    std::vector<double> emds(candidates.size());
    parallel_for(static_cast<int>(candidates.size()), workers, [&](int c) {
        emds[c] = emd(store.record(candidates[c].first).pdd,
                      store.record(candidates[c].second).pdd).distance;
    });
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (emds[c] > emd_threshold) continue;
        const auto& a = store.record(candidates[c].first);
        const auto& b = store.record(candidates[c].second);
        DuplicatePair pair{a.label, b.label, gaps[c], emds[c]};
        if (pair.label_b < pair.label_a) std::swap(pair.label_a, pair.label_b);
        report.pairs.push_back(std::move(pair));
    }
    std::sort(report.pairs.begin(), report.pairs.end(), [](const auto& x, const auto& y) {
        return std::tie(x.emd, x.label_a, x.label_b) < std::tie(y.emd, y.label_a, y.label_b);
    });
    return report;
}

namespace {

struct DisjointSets {
    std::vector<int> parent;
    explicit DisjointSets(int n) : parent(n) {
        for (int i = 0; i < n; ++i) parent[i] = i;
    }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

}  // namespace

MstResult build_mst(const InvariantStore& store, int candidate_count, int workers) {
    const int n = store.size();
    if (n < 2) throw InputError("minimum spanning tree needs at least two records");
    if (candidate_count < 1) throw InputError("candidate count must be positive");

    MstResult result;
    result.candidate_count = candidate_count;
    result.approximate = candidate_count < n - 1;

    // candidate edges: nearest records by packing-coefficient difference
    std::vector<std::pair<int, int>> edges;
    {
        std::vector<std::vector<char>> picked(n, std::vector<char>(n, 0));
        for (int i = 0; i < n; ++i) {
            std::vector<int> order;
            for (int j = 0; j < n; ++j)
                if (j != i) order.push_back(j);
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
                const double da = std::abs(store.record(i).ppc - store.record(a).ppc);
                const double db = std::abs(store.record(i).ppc - store.record(b).ppc);
                if (da != db) return da < db;
                return store.record(a).label < store.record(b).label;
            });
            for (int c = 0; c < candidate_count && c < static_cast<int>(order.size()); ++c) {
                const int j = order[c];
                picked[std::min(i, j)][std::max(i, j)] = 1;
            }
        }
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (picked[i][j]) edges.emplace_back(i, j);
    }

    std::vector<double> cached(static_cast<std::size_t>(n) * n,
                               std::numeric_limits<double>::quiet_NaN());
    auto pair_emd = [&](int i, int j) -> double& { return cached[static_cast<std::size_t>(i) * n + j]; };

    std::vector<double> weights(edges.size());
    parallel_for(static_cast<int>(edges.size()), workers, [&](int e) {
        weights[e] = emd(store.record(edges[e].first).pdd, store.record(edges[e].second).pdd).distance;
    });
    for (std::size_t e = 0; e < edges.size(); ++e) {
        pair_emd(edges[e].first, edges[e].second) = weights[e];
        pair_emd(edges[e].second, edges[e].first) = weights[e];
    }

    // Kruskal over the candidate graph, deterministic tie-breaking
    std::vector<int> order(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) order[e] = static_cast<int>(e);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto la = std::tie(store.record(edges[a].first).label, store.record(edges[a].second).label);
        const auto lb = std::tie(store.record(edges[b].first).label, store.record(edges[b].second).label);
        if (weights[a] != weights[b]) return weights[a] < weights[b];
        return la < lb;
    });
    DisjointSets components(n);
    std::vector<std::pair<std::pair<int, int>, double>> tree;
    for (int e : order)
        if (components.unite(edges[e].first, edges[e].second))
            tree.push_back({edges[e], weights[e]});

    // join remaining components by exact nearest cross-component distance
    while (static_cast<int>(tree.size()) < n - 1) {
        std::vector<std::pair<int, int>> cross;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (components.find(i) != components.find(j) && std::isnan(pair_emd(i, j)))
                    cross.emplace_back(i, j);
        std::vector<double> cw(cross.size());
        parallel_for(static_cast<int>(cross.size()), workers, [&](int c) {
            cw[c] = emd(store.record(cross[c].first).pdd, store.record(cross[c].second).pdd).distance;
        });
        for (std::size_t c = 0; c < cross.size(); ++c) {
            pair_emd(cross[c].first, cross[c].second) = cw[c];
            pair_emd(cross[c].second, cross[c].first) = cw[c];
        }
        int best_i = -1, best_j = -1;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                if (components.find(i) == components.find(j)) continue;
                if (best_i < 0) {
                    best_i = i;
                    best_j = j;
                    continue;
                }
                const double w = pair_emd(i, j), bw = pair_emd(best_i, best_j);
                const auto lab = std::tie(store.record(i).label, store.record(j).label);
                const auto best_lab = std::tie(store.record(best_i).label, store.record(best_j).label);
                if (w < bw || (w == bw && lab < best_lab)) {
                    best_i = i;
                    best_j = j;
                }
            }
        components.unite(best_i, best_j);
        tree.push_back({{best_i, best_j}, pair_emd(best_i, best_j)});
    }

    for (const auto& [edge, weight] : tree) {
        MstEdge e{store.record(edge.first).label, store.record(edge.second).label, weight};
        if (e.label_b < e.label_a) std::swap(e.label_a, e.label_b);
        result.edges.push_back(std::move(e));
    }
    std::sort(result.edges.begin(), result.edges.end(), [](const auto& x, const auto& y) {
        return std::tie(x.emd, x.label_a, x.label_b) < std::tie(y.emd, y.label_a, y.label_b);
    });
    return result;
}

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string report_to_csv(const DuplicateReport& report) {
    std::string out = "label_a,label_b,amd_gap,emd\n";
    for (const auto& p : report.pairs)
        out += p.label_a + "," + p.label_b + "," + fmt_double(p.amd_gap) + "," + fmt_double(p.emd) +
               "\n";
    return out;
}

std::string report_to_json(const DuplicateReport& report) {
    nlohmann::json j;
    j["amd_threshold"] = report.amd_threshold;
    j["emd_threshold"] = report.emd_threshold;
    j["pairs"] = nlohmann::json::array();
    for (const auto& p : report.pairs)
        j["pairs"].push_back({{"label_a", p.label_a},
                              {"label_b", p.label_b},
                              {"amd_gap", p.amd_gap},
                              {"emd", p.emd}});
    return j.dump(2) + "\n";
}

std::string mst_to_csv(const MstResult& mst) {
    std::string out = "label_a,label_b,emd\n";
    for (const auto& e : mst.edges)
        out += e.label_a + "," + e.label_b + "," + fmt_double(e.emd) + "\n";
    return out;
}

std::string mst_to_json(const MstResult& mst, const InvariantStore& store) {
    nlohmann::json j;
    j["metadata"] = {{"approximate", mst.approximate},
                     {"candidate_count", mst.candidate_count},
                     {"k", store.k()}};
    j["nodes"] = nlohmann::json::array();
    for (const auto& rec : store.records())
        j["nodes"].push_back({{"id", rec.label}, {"ppc", rec.ppc}});
    j["edges"] = nlohmann::json::array();
    for (const auto& e : mst.edges)
        j["edges"].push_back({{"source", e.label_a}, {"target", e.label_b}, {"weight", e.emd}});
    return j.dump(2) + "\n";
}

// --- persistence ---

namespace {

void append_bytes(std::vector<std::uint8_t>& out, const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
}

template <typename T>
void append_val(std::vector<std::uint8_t>& out, T v) {
    append_bytes(out, &v, sizeof(T));
}

void append_string(std::vector<std::uint8_t>& out, const std::string& s) {
    append_val<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    append_bytes(out, s.data(), s.size());
}

template <typename T>
T read_val(const std::uint8_t*& p, const std::uint8_t* end) {
    if (p + sizeof(T) > end) throw InputError("truncated invariant record");
    T v;
    std::memcpy(&v, p, sizeof(T));
    p += sizeof(T);
    return v;
}

std::string read_string(const std::uint8_t*& p, const std::uint8_t* end) {
    const auto len = read_val<std::uint32_t>(p, end);
    if (p + len > end) throw InputError("truncated invariant record");
    std::string s(reinterpret_cast<const char*>(p), len);
    p += len;
    return s;
}

}  // namespace

std::vector<std::uint8_t> record_to_binary(const InvariantRecord& record) {
    std::vector<std::uint8_t> out;
    append_bytes(out, "PREC", 4);
    append_val<std::uint32_t>(out, 1);  // version
    append_string(out, record.label);
    append_string(out, record.provenance.source);
    append_string(out, record.provenance.block);
    append_val<double>(out, record.ppc);
    const auto amd_bytes = amd_to_binary(record.amd);
    append_val<std::uint64_t>(out, amd_bytes.size());
    out.insert(out.end(), amd_bytes.begin(), amd_bytes.end());
    const auto pdd_bytes = pdd_to_binary(record.pdd);
    append_val<std::uint64_t>(out, pdd_bytes.size());
    out.insert(out.end(), pdd_bytes.begin(), pdd_bytes.end());
    return out;
}

InvariantRecord record_from_binary(const std::uint8_t* data, std::size_t size) {
    const std::uint8_t* p = data;
    const std::uint8_t* end = data + size;
    if (p + 4 > end || std::memcmp(p, "PREC", 4) != 0)
        throw InputError("bad invariant record magic");
    p += 4;
    if (read_val<std::uint32_t>(p, end) != 1)
        throw InputError("unsupported invariant record version");
    std::string label = read_string(p, end);
    std::string source = read_string(p, end);
    std::string block = read_string(p, end);
    const double ppc_value = read_val<double>(p, end);
    const auto amd_len = read_val<std::uint64_t>(p, end);
    if (p + amd_len > end) throw InputError("truncated invariant record");
    AMDVector amd_vec = amd_from_binary(p, amd_len);
    p += amd_len;
    const auto pdd_len = read_val<std::uint64_t>(p, end);
    if (p + pdd_len > end) throw InputError("truncated invariant record");
    PDDMatrix matrix = pdd_from_binary(p, pdd_len);
    return InvariantRecord{std::move(label), std::move(amd_vec), std::move(matrix), ppc_value,
                           {std::move(source), std::move(block)}};
}

void save_store(const InvariantStore& store, const std::string& directory) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    nlohmann::json manifest;
    manifest["version"] = 1;
    manifest["k"] = store.k();
    manifest["records"] = nlohmann::json::array();
    for (int i = 0; i < store.size(); ++i) {
        const auto& rec = store.record(i);
        char name[32];
        std::snprintf(name, sizeof(name), "record_%06d.bin", i);
        const auto bytes = record_to_binary(rec);
        std::ofstream out(fs::path(directory) / name, std::ios::binary);
        if (!out) throw InputError("cannot write store record in " + directory);
        out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        manifest["records"].push_back({{"label", rec.label},
                                       {"file", name},
                                       {"ppc", rec.ppc},
                                       {"source", rec.provenance.source},
                                       {"block", rec.provenance.block}});
    }
    write_text_file((fs::path(directory) / "manifest.json").string(), manifest.dump(2) + "\n");
}

InvariantStore load_store(const std::string& directory) {
    namespace fs = std::filesystem;
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_text_file((fs::path(directory) / "manifest.json").string()));
    } catch (const nlohmann::json::exception& e) {
        throw InputError("invalid store manifest: " + std::string(e.what()));
    }
    if (manifest.value("version", 0) != 1) throw InputError("unsupported store version");
    InvariantStore store(manifest.at("k").get<int>());
    for (const auto& entry : manifest.at("records")) {
        const std::string file = entry.at("file").get<std::string>();
        std::ifstream in(fs::path(directory) / file, std::ios::binary);
        if (!in) throw InputError("missing store record: " + file);
        std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
        store.add(record_from_binary(bytes.data(), bytes.size()));
    }
    return store;
}

}  // namespace pdd
