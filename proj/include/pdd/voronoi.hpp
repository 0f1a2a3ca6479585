#pragma once

#include <vector>

#include "pdd/core.hpp"

namespace pdd {

/// Voronoi cell of the origin of a lattice. Vertices are found by
/// intersecting bisector half-spaces x.p <= |p|^2/2 of nearby lattice points.
struct VoronoiCell {
    int dim = 0;
    std::vector<Vec> generators;  // lattice points whose bisectors can touch the cell
    std::vector<Vec> vertices;
    double covering_radius = 0.0;  // max distance from the origin to a vertex
};

/// Greedy pairwise size reduction; columns of the result span the same lattice.
std::vector<double> reduce_basis(const Lattice& lattice);

VoronoiCell voronoi_cell(const Lattice& lattice);

/// Max distance from any point of space to the nearest lattice point.
double covering_radius(const Lattice& lattice);

/// Distance from x to the nearest wall of the cell scaled by `scale` about
/// the origin; negative when x lies outside.
double cell_margin(const VoronoiCell& cell, const Vec& x, double scale = 1.0);

inline bool in_open_cell(const VoronoiCell& cell, const Vec& x, double margin = 1e-9) {
    return cell_margin(cell, x) > margin;
}

/// Minimum-norm representative of x modulo the lattice (lies in the closed cell).
Vec min_norm_representative(const Lattice& lattice, const Vec& x);

}  // namespace pdd
