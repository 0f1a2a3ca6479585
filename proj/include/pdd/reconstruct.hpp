#pragma once

#include <string>
#include <vector>

#include "pdd/core.hpp"
#include "pdd/invariants.hpp"
#include "pdd/voronoi.hpp"

namespace pdd {

/// Lattice points around the origin that both span space and contain the n+1
/// nearest lattice neighbors of every point of the Voronoi domain.
struct NeighborSet {
    std::vector<Vec> points;  // excludes the origin; centrally symmetric
    double radius = 0.0;      // selection radius (at most 2 * covering radius)
};

NeighborSet neighbor_set(const Lattice& lattice);

struct BasisDistances {
    std::vector<double> distances;  // sorted ascending, length n
    std::vector<Vec> points;        // a realizing tuple, ordered by distance to q
};

/// Lexicographically smallest sorted distance list from q to a linearly
/// independent tuple of neighbor-set points. q must lie strictly inside the
/// open Voronoi domain of the origin.
BasisDistances basis_distances(const Vec& q, const NeighborSet& nset, const Lattice& lattice);

struct GenericityViolation {
    char condition;  // 'a', 'b' or 'c'
    std::string description;
    std::vector<Vec> witness;
};

struct GenericityReport {
    bool is_generic = true;
    std::vector<GenericityViolation> violations;
};

/// Checks the three reconstruction-genericity conditions: no orthogonal motif
/// vectors in the Voronoi domain, no coincidental length equalities/doublings
/// up to twice the covering radius, and unique (up to central symmetry)
/// sphere-intersection placement of every motif point. The origin is shifted
/// onto each motif point in turn.
GenericityReport check_distance_generic(const PeriodicSet& set);

std::string genericity_report_to_json(const GenericityReport& report);

struct ReconstructionTrace {
    double covering_radius = 0.0;
    int neighbor_set_size = 0;
    struct Placement {
        int row;
        Vec position;
        int candidates;
    };
    std::vector<Placement> placements;
};

std::string trace_to_json(const ReconstructionTrace& trace);

/// Rebuilds a periodic set from its lattice, motif size and PDD. The input
/// must come from a distance-generic set and k must be large enough that
/// twice the covering radius stays below every last-column entry. The result
/// is isometric to the original (fixing the one global mirror choice).
PeriodicSet reconstruct_motif(const Lattice& lattice, int m, const PDDMatrix& matrix,
                              ReconstructionTrace* trace = nullptr);

}  // namespace pdd
