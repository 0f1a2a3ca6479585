#include "pdd/nnsearch.hpp"

#include <algorithm>
#include <cmath>

#include "pdd/kdtree.hpp"

namespace pdd {

ShellGenerator::ShellGenerator(const PeriodicSet& set)
    : lattice_(set.lattice()),
      dim_(set.dim()),
      motif_size_(set.motif_size()),
      min_height_(set.lattice().min_height()) {
    motif_cart_.reserve(static_cast<std::size_t>(motif_size_) * dim_);
    for (const auto& p : set.motif().points()) {
        const Vec c = lattice_.to_cartesian(p);
        motif_cart_.insert(motif_cart_.end(), c.begin(), c.end());
    }
}

void ShellGenerator::next_shell(std::vector<double>& cloud) {
    const int s = next_shell_index_;
    // Walk integer coefficient vectors with max-norm == s.
    Vec coeff(dim_, static_cast<double>(-s));
    Vec translate(dim_);
    while (true) {
        bool on_shell = s == 0;
        for (int d = 0; d < dim_ && !on_shell; ++d)
            if (std::abs(coeff[d]) == s) on_shell = true;
        if (on_shell) {
            for (int i = 0; i < dim_; ++i) {
                double t = 0.0;
                for (int j = 0; j < dim_; ++j) t += lattice_.basis(i, j) * coeff[j];
                translate[i] = t;
            }
            for (int p = 0; p < motif_size_; ++p)
                for (int i = 0; i < dim_; ++i)
                    cloud.push_back(motif_cart_[static_cast<std::size_t>(p) * dim_ + i] + translate[i]);
            emitted_points_ += motif_size_;
        }
        int d = 0;
        while (d < dim_ && coeff[d] == s) coeff[d++] = -s;
        if (d == dim_) break;
        coeff[d] += 1.0;
    }
    next_shell_index_ = s + 1;
    covered_radius_ = s * min_height_;
}

namespace {

DistanceMatrix matrix_from_rows(int k, std::vector<std::vector<double>> rows) {
    DistanceMatrix dm;
    dm.k = k;
    dm.rows = std::move(rows);
    dm.row_order.resize(dm.rows.size());
    for (std::size_t i = 0; i < dm.row_order.size(); ++i) dm.row_order[i] = static_cast<int>(i);
    return dm;
}

}  // namespace

DistanceMatrix neighbor_distances(const FiniteSet& set, int k) {
    if (k <= 0) throw InputError("neighbor count k must be positive");
    if (k > set.size() - 1)
        throw InputError("finite set too small: k must be at most point count - 1");
    const int n = set.dim();
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(set.size()) * n);
    for (const auto& p : set.points()) flat.insert(flat.end(), p.begin(), p.end());
    KdTree tree(flat, n);
    std::vector<std::vector<double>> rows(set.size());
    std::vector<double> dists;
    for (int i = 0; i < set.size(); ++i) {
        tree.knn(set.point(i).data(), k + 1, dists);
        // Drop the query point itself (distance zero; points are distinct).
        rows[i].assign(dists.begin() + 1, dists.end());
    }
    return matrix_from_rows(k, std::move(rows));
}

DistanceMatrix neighbor_distances(const PeriodicSet& set, int k) {
    if (k <= 0) throw InputError("neighbor count k must be positive");
    const int n = set.dim();
    const int m = set.motif_size();
    ShellGenerator gen(set);
    std::vector<double> cloud;

    // Rough radius holding k neighbors per point, assuming uniform density.
    const double unit_ball = std::pow(3.14159265358979323846, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
    const double guess = std::pow(k * set.lattice().volume() / (m * unit_ball), 1.0 / n);

    while (gen.emitted_points() < static_cast<std::size_t>(k) + 1 || gen.covered_radius() < guess)
        gen.next_shell(cloud);

    std::vector<std::vector<double>> rows(m);
    std::vector<double> dists;
    while (true) {
        KdTree tree(cloud, n);
        double worst = 0.0;
        for (int i = 0; i < m; ++i) {
            tree.knn(cloud.data() + static_cast<std::size_t>(i) * n, k + 1, dists);
            rows[i].assign(dists.begin() + 1, dists.end());
            worst = std::max(worst, rows[i].back());
        }
        // Distances are certified once every k-th distance lies within the
        // radius already covered by emitted shells (small slack for rounding).
        if (worst <= gen.covered_radius() * (1.0 - 1e-12)) break;
        const double target = std::max(worst * (1.0 + 1e-9), 1.5 * gen.covered_radius());
        while (gen.covered_radius() < target) gen.next_shell(cloud);
    }
    return matrix_from_rows(k, std::move(rows));
}

DistanceMatrix neighbor_distances(const Structure& set, int k) {
    return std::visit([k](const auto& s) { return neighbor_distances(s, k); }, set);
}

}  // namespace pdd
