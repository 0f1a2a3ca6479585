#pragma once

#include <vector>

#include "pdd/core.hpp"

namespace pdd {

/// Emits the points of a periodic set shell by shell. Shell s holds all motif
/// copies translated by integer coefficient vectors of max-norm s, so the
/// first emission is exactly the motif. After emitting shells 0..s, every
/// point of the infinite set within covered_radius() = s * min_height of any
/// home-cell point has been produced.
class ShellGenerator {
public:
    explicit ShellGenerator(const PeriodicSet& set);

    /// Appends the next shell to `cloud` (flat, stride = dim).
    void next_shell(std::vector<double>& cloud);

    int emitted_shells() const noexcept { return next_shell_index_; }
    double covered_radius() const noexcept { return covered_radius_; }
    std::size_t emitted_points() const noexcept { return emitted_points_; }

private:
    const Lattice lattice_;
    std::vector<double> motif_cart_;  // flat
    int dim_;
    int motif_size_;
    double min_height_;
    int next_shell_index_ = 0;
    double covered_radius_ = 0.0;
    std::size_t emitted_points_ = 0;
};

/// Exact distances from each motif point to its k nearest neighbors in the
/// full (infinite or finite) set. Rows are in motif order, sorted ascending.
struct DistanceMatrix {
    int k = 0;
    std::vector<int> row_order;                // original motif index per row
    std::vector<std::vector<double>> rows;     // each row non-decreasing, entries > 0
};

DistanceMatrix neighbor_distances(const PeriodicSet& set, int k);
DistanceMatrix neighbor_distances(const FiniteSet& set, int k);
DistanceMatrix neighbor_distances(const Structure& set, int k);

}  // namespace pdd
