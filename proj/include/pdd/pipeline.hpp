#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pdd/core.hpp"
#include "pdd/invariants.hpp"
#include "pdd/metrics.hpp"

namespace pdd {

struct Provenance {
    std::string source;  // file path
    std::string block;   // CIF block name, when applicable
};

struct InvariantRecord {
    std::string label;
    AMDVector amd;
    PDDMatrix pdd;
    double ppc = 0.0;
    Provenance provenance;
};

/// Write-once collection of invariant records sharing one neighbor count k.
class InvariantStore {
public:
    explicit InvariantStore(int k);

    int k() const noexcept { return k_; }
    int size() const noexcept { return static_cast<int>(records_.size()); }
    const InvariantRecord& record(int i) const { return records_[i]; }
    const std::vector<InvariantRecord>& records() const noexcept { return records_; }
    const InvariantRecord* find(const std::string& label) const;

    void add(InvariantRecord record);

private:
    int k_;
    std::vector<InvariantRecord> records_;
    std::map<std::string, int> index_;
};

/// Computes AMD/PDD/PPC for each set (in parallel) and fills a store.
/// Labels must be unique; provenance is optional and parallel to `sets`.
InvariantStore build_store(const std::vector<PeriodicSet>& sets, int k,
                           double collapse_tol = 0.0, int workers = 0,
                           const std::vector<Provenance>* provenance = nullptr);

struct DuplicatePair {
    std::string label_a, label_b;  // label_a < label_b
    double amd_gap;
    double emd;
};

struct DuplicateReport {
    double amd_threshold = 0.0;  // thresholds actually used
    double emd_threshold = 0.0;
    std::vector<DuplicatePair> pairs;  // sorted by emd, then labels
};

/// Two-stage duplicate scan: cheap AMD gaps first, exact EMD on survivors.
/// The AMD threshold is raised to the EMD threshold when below it; the AMD
/// gap lower-bounds the EMD, so a smaller filter threshold would drop pairs
/// the EMD stage should still see.
DuplicateReport scan_duplicates(const InvariantStore& store, double amd_threshold,
                                double emd_threshold, int workers = 0);

struct MstEdge {
    std::string label_a, label_b;
    double emd;
};

struct MstResult {
    std::vector<MstEdge> edges;  // sorted by weight, then labels
    bool approximate = false;    // candidate pruning may miss true nearest neighbors
    int candidate_count = 0;
};

/// Minimum spanning tree over EMD, with candidate edges pruned to the
/// `candidate_count` nearest records by packing-coefficient difference.
/// Disconnected candidate graphs are joined by exact nearest cross-component
/// EMD. Deterministic: ties break on label order.
MstResult build_mst(const InvariantStore& store, int candidate_count, int workers = 0);

std::string report_to_csv(const DuplicateReport& report);
std::string report_to_json(const DuplicateReport& report);
std::string mst_to_csv(const MstResult& mst);
std::string mst_to_json(const MstResult& mst, const InvariantStore& store);

/// Store persistence: one versioned binary record per entry plus a JSON
/// manifest listing labels, files and provenance.
void save_store(const InvariantStore& store, const std::string& directory);
InvariantStore load_store(const std::string& directory);

std::vector<std::uint8_t> record_to_binary(const InvariantRecord& record);
InvariantRecord record_from_binary(const std::uint8_t* data, std::size_t size);

/// Runs fn(0..n-1) on up to `workers` threads (0 = all hardware threads).
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace pdd
