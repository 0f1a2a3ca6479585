#include "pdd/voronoi.hpp"

#include <algorithm>
#include <cmath>

namespace pdd {

namespace {

// Solves A x = b for small n with partial pivoting; false when singular.
bool solve_linear(int n, std::vector<double> a, Vec b, Vec& x) {
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
        if (std::abs(a[pivot * n + col]) < 1e-12) return false;
        if (pivot != col) {
            for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
            std::swap(b[col], b[pivot]);
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r * n + col] / a[col * n + col];
            if (f == 0.0) continue;
            for (int c = 0; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    x.resize(n);
    for (int i = 0; i < n; ++i) x[i] = b[i] / a[i * n + i];
    return true;
}

std::vector<Vec> basis_columns(const std::vector<double>& colmajor, int n) {
    std::vector<Vec> cols(n, Vec(n));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) cols[j][i] = colmajor[i + static_cast<std::size_t>(n) * j];
    return cols;
}

// All nonzero integer combinations of the columns with coefficients in [-box, box].
std::vector<Vec> lattice_points_in_box(const std::vector<Vec>& cols, int box) {
    const int n = static_cast<int>(cols.size());
    std::vector<Vec> out;
    std::vector<int> c(n, -box);
    while (true) {
        bool zero = true;
        for (int i = 0; i < n; ++i)
            if (c[i] != 0) zero = false;
        if (!zero) {
            Vec p(n, 0.0);
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) p[i] += c[j] * cols[j][i];
            out.push_back(std::move(p));
        }
        int i = 0;
        while (i < n && c[i] == box) c[i++] = -box;
        if (i == n) break;
        ++c[i];
    }
    return out;
}

}  // namespace

std::vector<double> reduce_basis(const Lattice& lattice) {
    const int n = lattice.dim();
    auto cols = basis_columns(lattice.basis_data(), n);
    for (int pass = 0; pass < 64; ++pass) {
        std::sort(cols.begin(), cols.end(),
                  [](const Vec& a, const Vec& b) { return norm2(a) < norm2(b); });
        bool changed = false;
        for (int j = 1; j < n; ++j)
            for (int i = 0; i < j; ++i) {
                const double mu = std::round(dot(cols[j], cols[i]) / norm2(cols[i]));
                if (mu == 0.0) continue;
                for (int d = 0; d < n; ++d) cols[j][d] -= mu * cols[i][d];
                changed = true;
            }
        if (!changed) break;
    }
    std::vector<double> out(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) out[i + static_cast<std::size_t>(n) * j] = cols[j][i];
    return out;
}

VoronoiCell voronoi_cell(const Lattice& lattice) {
    const int n = lattice.dim();
    const Lattice reduced(n, reduce_basis(lattice));
    const auto cols = basis_columns(reduced.basis_data(), n);
    const double hmin = reduced.min_height();

    for (int box = 2; box <= 6; ++box) {
        const auto candidates = lattice_points_in_box(cols, box);

        // vertices: n bisectors tight, all other constraints satisfied
        std::vector<Vec> vertices;
        double scale2 = 0.0;
        for (const auto& p : candidates) scale2 = std::max(scale2, norm2(p));
        const double slack = 1e-9 * scale2;

        std::vector<int> idx(n);
        const int count = static_cast<int>(candidates.size());
        // iterate over n-subsets
        for (int i = 0; i < n; ++i) idx[i] = i;
        while (true) {
            std::vector<double> a(static_cast<std::size_t>(n) * n);
            Vec b(n);
            for (int r = 0; r < n; ++r) {
                for (int c = 0; c < n; ++c) a[r * n + c] = candidates[idx[r]][c];
                b[r] = 0.5 * norm2(candidates[idx[r]]);
            }
            Vec x;
            if (solve_linear(n, std::move(a), std::move(b), x)) {
                bool inside = true;
                for (const auto& p : candidates)
                    if (dot(x, p) > 0.5 * norm2(p) + slack) {
                        inside = false;
                        break;
                    }
                if (inside) vertices.push_back(std::move(x));
            }
            int pos = n - 1;
            while (pos >= 0 && idx[pos] == count - n + pos) --pos;
            if (pos < 0) break;
            ++idx[pos];
            for (int r = pos + 1; r < n; ++r) idx[r] = idx[r - 1] + 1;
        }
        if (vertices.empty()) continue;

        double radius = 0.0;
        for (const auto& v : vertices) radius = std::max(radius, norm(v));
        // the box is large enough when every unenumerated lattice point is
        // provably too far to cut the cell
        if ((box + 1) * hmin <= 2.0 * radius * (1.0 + 1e-9)) continue;

        VoronoiCell cell;
        cell.dim = n;
        cell.covering_radius = radius;
        // keep bisectors that can matter for points within the (scaled) cell
        for (const auto& p : candidates)
            if (norm(p) <= 2.0 * radius * (1.0 + 1e-9)) cell.generators.push_back(p);
        // deduplicate vertices
        std::sort(vertices.begin(), vertices.end());
        const double sep = 1e-9 * (1.0 + radius);
        for (const auto& v : vertices) {
            bool fresh = true;
            for (const auto& u : cell.vertices)
                if (dist(u, v) < sep) {
                    fresh = false;
                    break;
                }
            if (fresh) cell.vertices.push_back(v);
        }
        return cell;
    }
    throw NumericError("voronoi cell: enumeration box exhausted (extremely skewed basis)");
}

double covering_radius(const Lattice& lattice) { return voronoi_cell(lattice).covering_radius; }

double cell_margin(const VoronoiCell& cell, const Vec& x, double scale) {
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& g : cell.generators) {
        const double len = norm(g);
        margin = std::min(margin, (scale * 0.5 * norm2(g) - dot(x, g)) / len);
    }
    return margin;
}

Vec min_norm_representative(const Lattice& lattice, const Vec& x) {
    const int n = lattice.dim();
    const Lattice reduced(n, reduce_basis(lattice));
    const auto cols = basis_columns(reduced.basis_data(), n);
    Vec frac = reduced.to_fractional(x);
    Vec base(n, 0.0);
    for (int j = 0; j < n; ++j) {
        const double r = std::round(frac[j]);
        for (int i = 0; i < n; ++i) base[i] += r * cols[j][i];
    }
    Vec best(n);
    for (int i = 0; i < n; ++i) best[i] = x[i] - base[i];
    double best2 = norm2(best);
    // search neighbor cells of the rounded anchor
    std::vector<int> c(n, -2);
    while (true) {
        Vec cand(n);
        for (int i = 0; i < n; ++i) {
            double t = 0.0;
            for (int j = 0; j < n; ++j) t += c[j] * cols[j][i];
            cand[i] = x[i] - base[i] - t;
        }
        const double d2 = norm2(cand);
        if (d2 < best2) {
            best2 = d2;
            best = cand;
        }
        int i = 0;
        while (i < n && c[i] == 2) c[i++] = -2;
        if (i == n) break;
        ++c[i];
    }
    return best;
}

}  // namespace pdd
