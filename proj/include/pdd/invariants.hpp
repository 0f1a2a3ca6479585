#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdd/core.hpp"
#include "pdd/nnsearch.hpp"
#include "pdd/rational.hpp"

namespace pdd {

struct PddRow {
    Rational weight;                 // in (0,1]; all weights sum to exactly 1
    std::vector<double> distances;   // non-decreasing, length k
};

/// Pointwise distance distribution: weighted, lexicographically ordered rows
/// of nearest-neighbor distances. Rows are strictly increasing in lex order.
class PDDMatrix {
public:
    PDDMatrix(int k, std::vector<PddRow> rows);

    int k() const noexcept { return k_; }
    int row_count() const noexcept { return static_cast<int>(rows_.size()); }
    const PddRow& row(int i) const { return rows_[i]; }
    const std::vector<PddRow>& rows() const noexcept { return rows_; }

    bool operator==(const PDDMatrix& o) const;

private:
    int k_;
    std::vector<PddRow> rows_;
};

/// Weighted column means of a PDD; non-decreasing by construction.
class AMDVector {
public:
    explicit AMDVector(std::vector<double> values);

    int k() const noexcept { return static_cast<int>(values_.size()); }
    double value(int i) const { return values_[i]; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::vector<double> values_;
};

/// Lexicographic comparison on distance vectors only (weights excluded).
bool lex_less(const std::vector<double>& a, const std::vector<double>& b);

/// Builds PDD(S;k). Rows equal within `collapse_tol` (L-infinity) are merged
/// and their weights summed; the default 0 merges only bit-equal rows.
PDDMatrix pdd(const PeriodicSet& set, int k, double collapse_tol = 0.0);
PDDMatrix pdd(const FiniteSet& set, int k, double collapse_tol = 0.0);
PDDMatrix pdd(const Structure& set, int k, double collapse_tol = 0.0);

/// Collapses and orders an already-computed distance matrix.
PDDMatrix pdd_from_distances(const DistanceMatrix& dm, double collapse_tol = 0.0);

AMDVector amd(const PDDMatrix& matrix);

/// Point packing coefficient: (Vol[U] / (m * V_n))^(1/n) with V_n the unit
/// ball volume. The k-th neighbor distance grows like ppc * k^(1/n).
double ppc(const PeriodicSet& set);

double unit_ball_volume(int n);

// --- serialization ---

/// CSV: one line per row, weight first, then the k distances (%.17g).
std::string pdd_to_csv(const PDDMatrix& matrix);
/// CSV: a single line of k values.
std::string amd_to_csv(const AMDVector& vec);

/// Versioned binary records; bit-exact round trip.
std::vector<std::uint8_t> pdd_to_binary(const PDDMatrix& matrix);
PDDMatrix pdd_from_binary(const std::uint8_t* data, std::size_t size);
std::vector<std::uint8_t> amd_to_binary(const AMDVector& vec);
AMDVector amd_from_binary(const std::uint8_t* data, std::size_t size);

/// JSON: {"k": k, "rows": [{"weight": [num, den], "distances": [...]}]}.
std::string pdd_to_json(const PDDMatrix& matrix);
PDDMatrix pdd_from_json(const std::string& text);
/// JSON: {"k": k, "values": [...]}.
std::string amd_to_json(const AMDVector& vec);

}  // namespace pdd
