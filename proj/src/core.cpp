#include "pdd/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pdd {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Gaussian elimination with partial pivoting; returns the determinant and,
// if inverse != nullptr, the column-major inverse.
double gauss_det_inverse(int n, const std::vector<double>& colmajor, std::vector<double>* inverse) {
    std::vector<double> a(colmajor);  // work on a copy, row-major view via a[r + n*c]
    std::vector<double> inv;
    if (inverse) {
        inv.assign(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i) inv[i + static_cast<std::size_t>(n) * i] = 1.0;
    }
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r + static_cast<std::size_t>(n) * col]) >
                std::abs(a[pivot + static_cast<std::size_t>(n) * col]))
                pivot = r;
        if (a[pivot + static_cast<std::size_t>(n) * col] == 0.0) return 0.0;
        if (pivot != col) {
            for (int c = 0; c < n; ++c) {
                std::swap(a[col + static_cast<std::size_t>(n) * c], a[pivot + static_cast<std::size_t>(n) * c]);
                if (inverse) std::swap(inv[col + static_cast<std::size_t>(n) * c],
                                       inv[pivot + static_cast<std::size_t>(n) * c]);
            }
            det = -det;
        }
        const double p = a[col + static_cast<std::size_t>(n) * col];
        det *= p;
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r + static_cast<std::size_t>(n) * col] / p;
            if (f == 0.0) continue;
            for (int c = 0; c < n; ++c) {
                a[r + static_cast<std::size_t>(n) * c] -= f * a[col + static_cast<std::size_t>(n) * c];
                if (inverse) inv[r + static_cast<std::size_t>(n) * c] -= f * inv[col + static_cast<std::size_t>(n) * c];
            }
        }
    }
    if (inverse) {
        for (int r = 0; r < n; ++r) {
            const double p = a[r + static_cast<std::size_t>(n) * r];
            for (int c = 0; c < n; ++c) inv[r + static_cast<std::size_t>(n) * c] /= p;
        }
        *inverse = std::move(inv);
    }
    return det;
}

}  // namespace

Lattice::Lattice(int dim, std::vector<double> basis) : dim_(dim), basis_(std::move(basis)) {
    if (dim_ < 1) throw InputError("lattice dimension must be positive");
    if (basis_.size() != static_cast<std::size_t>(dim_) * dim_)
        throw InputError("lattice basis size does not match dimension");
    double maxabs = 0.0;
    for (double v : basis_) {
        if (!std::isfinite(v)) throw InputError("lattice basis has non-finite entries");
        maxabs = std::max(maxabs, std::abs(v));
    }
    det_ = gauss_det_inverse(dim_, basis_, &inverse_);
    const double threshold = 1e-12 * std::pow(maxabs, dim_);
    if (!(std::abs(det_) > threshold))
        throw InputError("degenerate lattice basis (determinant too small)");
}

Lattice Lattice::from_columns(const std::vector<Vec>& columns) {
    const int n = static_cast<int>(columns.size());
    std::vector<double> data(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        if (static_cast<int>(columns[j].size()) != n)
            throw InputError("basis column length does not match dimension");
        for (int i = 0; i < n; ++i) data[i + static_cast<std::size_t>(n) * j] = columns[j][i];
    }
    return Lattice(n, std::move(data));
}

Vec Lattice::column(int j) const {
    Vec v(dim_);
    for (int i = 0; i < dim_; ++i) v[i] = basis(i, j);
    return v;
}

Vec Lattice::to_cartesian(const Vec& fractional) const {
    Vec out(dim_, 0.0);
    for (int j = 0; j < dim_; ++j)
        for (int i = 0; i < dim_; ++i) out[i] += basis(i, j) * fractional[j];
    return out;
}

Vec Lattice::to_fractional(const Vec& cartesian) const {
    Vec out(dim_, 0.0);
    for (int j = 0; j < dim_; ++j)
        for (int i = 0; i < dim_; ++i)
            out[i] += inverse_[i + static_cast<std::size_t>(dim_) * j] * cartesian[j];
    return out;
}

double Lattice::min_height() const {
    // Height along direction i = volume / area of the facet spanned by the
    // other vectors; the facet area is sqrt(det of their Gram matrix).
    double hmin = std::numeric_limits<double>::infinity();
    for (int skip = 0; skip < dim_; ++skip) {
        if (dim_ == 1) return volume();
        std::vector<Vec> others;
        for (int j = 0; j < dim_; ++j)
            if (j != skip) others.push_back(column(j));
        const int m = dim_ - 1;
        std::vector<double> gram(static_cast<std::size_t>(m) * m);
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c)
                gram[r + static_cast<std::size_t>(m) * c] = dot(others[r], others[c]);
        const double g = gauss_det_inverse(m, gram, nullptr);
        const double area = std::sqrt(std::max(g, 0.0));
        if (area > 0.0) hmin = std::min(hmin, volume() / area);
    }
    return hmin;
}

Motif::Motif(int dim, std::vector<Vec> fractional_points) : dim_(dim), points_(std::move(fractional_points)) {
    if (dim_ < 1) throw InputError("motif dimension must be positive");
    if (points_.empty()) throw InputError("motif must contain at least one point");
    for (auto& p : points_) {
        if (static_cast<int>(p.size()) != dim_)
            throw InputError("motif point dimension mismatch");
        for (auto& c : p) {
            if (!std::isfinite(c)) throw InputError("motif point has non-finite coordinate");
            c = wrap_unit(c);
        }
    }
    for (std::size_t i = 0; i < points_.size(); ++i)
        for (std::size_t j = i + 1; j < points_.size(); ++j)
            if (points_[i] == points_[j])
                throw InputError("motif contains duplicate points");
}

PeriodicSet::PeriodicSet(Lattice lattice, Motif motif, std::string label,
                         std::vector<std::string> site_labels)
    : lattice_(std::move(lattice)),
      motif_(std::move(motif)),
      label_(std::move(label)),
      site_labels_(std::move(site_labels)) {
    if (lattice_.dim() != motif_.dim())
        throw InputError("motif dimension does not match lattice dimension");
    if (!site_labels_.empty() && static_cast<int>(site_labels_.size()) != motif_.size())
        throw InputError("site label count does not match motif size");
}

FiniteSet::FiniteSet(std::vector<Vec> points, std::string label)
    : points_(std::move(points)), label_(std::move(label)) {
    if (points_.size() < 2) throw InputError("finite set needs at least two points");
    dim_ = static_cast<int>(points_[0].size());
    if (dim_ < 1) throw InputError("finite set dimension must be positive");
    for (const auto& p : points_) {
        if (static_cast<int>(p.size()) != dim_) throw InputError("finite set point dimension mismatch");
        for (double c : p)
            if (!std::isfinite(c)) throw InputError("finite set point has non-finite coordinate");
    }
    for (std::size_t i = 0; i < points_.size(); ++i)
        for (std::size_t j = i + 1; j < points_.size(); ++j)
            if (points_[i] == points_[j]) throw InputError("finite set contains duplicate points");
}

int dim_of(const Structure& s) {
    return std::visit([](const auto& v) { return v.dim(); }, s);
}

const std::string& label_of(const Structure& s) {
    return std::visit([](const auto& v) -> const std::string& { return v.label(); }, s);
}

Lattice cell_from_parameters(double a, double b, double c,
                             double alpha, double beta, double gamma) {
    if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0))
        throw InputError("cell lengths must be positive");
    for (double ang : {alpha, beta, gamma})
        if (!(ang > 0.0) || !(ang < 180.0))
            throw InputError("cell angles must lie strictly between 0 and 180 degrees");

    const double ca = std::cos(alpha * kPi / 180.0);
    const double cb = std::cos(beta * kPi / 180.0);
    const double cg = std::cos(gamma * kPi / 180.0);
    const double sg = std::sin(gamma * kPi / 180.0);

    // Squared volume factor; non-positive means the angles cannot close a cell.
    const double vsq = 1.0 - ca * ca - cb * cb - cg * cg + 2.0 * ca * cb * cg;
    if (!(vsq > 0.0)) throw InputError("degenerate cell volume for the given angles");

    std::vector<double> basis(9, 0.0);
    // column 0: a along x
    basis[0] = a;
    // column 1: b in the xy-plane
    basis[3] = b * cg;
    basis[4] = b * sg;
    // column 2: c completing a right-handed frame
    basis[6] = c * cb;
    basis[7] = c * (ca - cb * cg) / sg;
    basis[8] = c * std::sqrt(vsq) / sg;
    return Lattice(3, std::move(basis));
}

CellMetrics cell_metrics(const Lattice& lattice) {
    const int n = lattice.dim();
    double best = 0.0;
    // All diagonals +v0 +/- v1 ... +/- v_{n-1}; the first sign is fixed by symmetry.
    const int patterns = 1 << (n - 1);
    for (int mask = 0; mask < patterns; ++mask) {
        Vec d(n, 0.0);
        for (int j = 0; j < n; ++j) {
            const double sign = (j == 0) ? 1.0 : ((mask >> (j - 1)) & 1 ? -1.0 : 1.0);
            for (int i = 0; i < n; ++i) d[i] += sign * lattice.basis(i, j);
        }
        best = std::max(best, norm(d));
    }
    const double vol = lattice.volume();
    return CellMetrics{vol, best, best / std::pow(vol, 1.0 / n)};
}

std::vector<Vec> to_cartesian(const PeriodicSet& set) {
    std::vector<Vec> out;
    out.reserve(set.motif_size());
    for (const auto& p : set.motif().points()) out.push_back(set.lattice().to_cartesian(p));
    return out;
}

}  // namespace pdd
