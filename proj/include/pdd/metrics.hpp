#pragma once

#include <vector>

#include "pdd/core.hpp"
#include "pdd/invariants.hpp"

namespace pdd {

/// Transport plan between two PDD row distributions. Row/column sums stay
/// within the source/target weights and the total flow is exactly 1.
struct FlowEntry {
    int from;       // row index in the first matrix
    int to;         // row index in the second matrix
    double amount;  // in (0,1]
};

struct Flow {
    std::vector<FlowEntry> entries;  // sorted by (from, to)
    double cost = 0.0;
};

struct EmdResult {
    double distance = 0.0;
    Flow flow;
};

/// Chebyshev distance between two equal-length rows.
double row_distance(const std::vector<double>& a, const std::vector<double>& b);

/// Exact earth mover's distance between two PDDs under the L-infinity ground
/// distance, solved as a balanced transportation problem on integer-scaled
/// rational weights (network simplex). Returns an optimal flow witness.
EmdResult emd(const PDDMatrix& p, const PDDMatrix& q);

/// L-infinity distance between AMD vectors; a lower bound for the EMD of the
/// corresponding PDDs.
double amd_distance(const AMDVector& a, const AMDVector& b);

/// Audit form of a transport plan: {"cost": c, "entries": [[i, j, f], ...]}.
std::string flow_to_json(const Flow& flow);

/// Half the minimum inter-point distance of the set.
double packing_radius(const PeriodicSet& set);
double packing_radius(const FiniteSet& set);

}  // namespace pdd
