#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "pdd/errors.hpp"

namespace pdd {

/// A point or direction; length equals the ambient dimension.
using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }

inline double dist2(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double dist(const Vec& a, const Vec& b) { return std::sqrt(dist2(a, b)); }

/// Wraps a fractional coordinate into [0,1). Exact integers map to 0.
inline double wrap_unit(double x) {
    double w = x - std::floor(x);
    if (w >= 1.0) w -= 1.0;  // guards against rounding for tiny negative x
    return w;
}

/// Lattice spanned by the columns of a nonsingular n x n basis matrix (units: angstrom).
class Lattice {
public:
    /// `basis` is column-major: basis[i + dim*j] is component i of basis vector j.
    Lattice(int dim, std::vector<double> basis);

    static Lattice from_columns(const std::vector<Vec>& columns);

    int dim() const noexcept { return dim_; }
    double basis(int row, int col) const { return basis_[row + static_cast<std::size_t>(dim_) * col]; }
    const std::vector<double>& basis_data() const noexcept { return basis_; }
    Vec column(int j) const;

    /// Signed determinant of the basis.
    double det() const noexcept { return det_; }
    double volume() const noexcept { return std::abs(det_); }

    Vec to_cartesian(const Vec& fractional) const;
    Vec to_fractional(const Vec& cartesian) const;

    /// Minimal height of the cell parallelepiped: volume over the largest facet area.
    /// Parallel lattice planes are at least this far apart.
    double min_height() const;

private:
    int dim_;
    std::vector<double> basis_;
    std::vector<double> inverse_;  // column-major
    double det_;
};

/// Motif points in fractional coordinates; every coordinate lies in [0,1).
class Motif {
public:
    Motif(int dim, std::vector<Vec> fractional_points);

    int dim() const noexcept { return dim_; }
    int size() const noexcept { return static_cast<int>(points_.size()); }
    const Vec& point(int i) const { return points_[i]; }
    const std::vector<Vec>& points() const noexcept { return points_; }

private:
    int dim_;
    std::vector<Vec> points_;
};

/// A periodic point set: all lattice translates of a finite motif.
class PeriodicSet {
public:
    PeriodicSet(Lattice lattice, Motif motif, std::string label = {},
                std::vector<std::string> site_labels = {});

    const Lattice& lattice() const noexcept { return lattice_; }
    const Motif& motif() const noexcept { return motif_; }
    const std::string& label() const noexcept { return label_; }
    int dim() const noexcept { return lattice_.dim(); }
    int motif_size() const noexcept { return motif_.size(); }

    /// Optional per-site element labels; metadata only, never used by invariants.
    const std::vector<std::string>& site_labels() const noexcept { return site_labels_; }

private:
    Lattice lattice_;
    Motif motif_;
    std::string label_;
    std::vector<std::string> site_labels_;
};

/// A plain finite point set in Cartesian coordinates (at least two distinct points).
class FiniteSet {
public:
    explicit FiniteSet(std::vector<Vec> points, std::string label = {});

    int dim() const noexcept { return dim_; }
    int size() const noexcept { return static_cast<int>(points_.size()); }
    const Vec& point(int i) const { return points_[i]; }
    const std::vector<Vec>& points() const noexcept { return points_; }
    const std::string& label() const noexcept { return label_; }

private:
    int dim_;
    std::vector<Vec> points_;
    std::string label_;
};

using Structure = std::variant<PeriodicSet, FiniteSet>;

int dim_of(const Structure& s);
const std::string& label_of(const Structure& s);

/// Builds a 3D lattice from cell lengths (a,b,c) and angles (alpha,beta,gamma) in degrees.
/// Conventional orientation: first vector along x, second in the xy-plane, right-handed.
Lattice cell_from_parameters(double a, double b, double c,
                             double alpha, double beta, double gamma);

struct CellMetrics {
    double volume;
    double diameter;   // longest diagonal of the cell parallelepiped
    double skewness;   // diameter / volume^(1/n)
};

CellMetrics cell_metrics(const Lattice& lattice);

/// Cartesian positions of the motif points, in motif order.
std::vector<Vec> to_cartesian(const PeriodicSet& set);

}  // namespace pdd
