#include "pdd/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace pdd {

namespace {

constexpr double kSharedTol = 1e-7;    // matching a value across two rows
constexpr double kClusterSep = 1e-6;   // distinct candidate positions
constexpr double kCellMargin = 1e-9;   // strict interior of the Voronoi domain

std::vector<Vec> reduced_columns(const Lattice& lattice) {
    const int n = lattice.dim();
    const auto data = reduce_basis(lattice);
    std::vector<Vec> cols(n, Vec(n));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) cols[j][i] = data[i + static_cast<std::size_t>(n) * j];
    return cols;
}

// All lattice points (including 0) within |p| <= radius, via a coefficient box.
std::vector<Vec> lattice_ball(const std::vector<Vec>& cols, double hmin, double radius) {
    const int n = static_cast<int>(cols.size());
    const int box = static_cast<int>(std::ceil(radius / hmin)) + 1;
    std::vector<Vec> out;
    std::vector<int> c(n, -box);
    while (true) {
        Vec p(n, 0.0);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) p[i] += c[j] * cols[j][i];
        if (norm(p) <= radius) out.push_back(std::move(p));
        int i = 0;
        while (i < n && c[i] == box) c[i++] = -box;
        if (i == n) break;
        ++c[i];
    }
    return out;
}

bool linearly_independent(const std::vector<const Vec*>& tuple) {
    const int n = static_cast<int>(tuple.size());
    if (n == 1) return norm2(*tuple[0]) > 0.0;
    if (n == 2) {
        const Vec &a = *tuple[0], &b = *tuple[1];
        const double cross = a[0] * b[1] - a[1] * b[0];
        return std::abs(cross) > 1e-9 * norm(a) * norm(b);
    }
    const Vec &a = *tuple[0], &b = *tuple[1], &c = *tuple[2];
    const double det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
                       a[2] * (b[0] * c[1] - b[1] * c[0]);
    return std::abs(det) > 1e-9 * norm(a) * norm(b) * norm(c);
}

bool value_present(const std::vector<double>& sorted_row, double v, double tol) {
    auto it = std::lower_bound(sorted_row.begin(), sorted_row.end(), v - tol);
    return it != sorted_row.end() && *it <= v + tol;
}

// A value is recognized as a lattice-vector length when its double also
// appears in the row (certifiable only while 2v stays inside the row range).
bool lattice_like(const std::vector<double>& row, double v) {
    const double twice = 2.0 * v;
    if (twice > row.back() * (1.0 + 1e-12)) return false;
    return value_present(row, twice, std::max(kSharedTol, 1e-6 * twice));
}

struct SearchContext {
    int n;
    const VoronoiCell* cell;
    const NeighborSet* nset;
    double covering_radius;
};

// Positions x strictly inside the Voronoi domain whose distance environment
// is consistent with both rows: |x| and the distances from x to neighbor-set
// points must all appear in the two rows. Solved sphere systems: |x| = d0
// plus one (2D) or two (3D) bisector-style plane equations per tuple.
std::vector<Vec> find_placements(const SearchContext& ctx, const std::vector<double>& row0,
                                 const std::vector<double>& rowq) {
    const int n = ctx.n;
    const double range = std::min(row0.back(), rowq.back());

    // values shared by both rows, deduplicated, lattice lengths stripped
    std::vector<double> shared;
    for (double v : row0) {
        if (!shared.empty() && v - shared.back() <= kSharedTol) continue;
        if (!value_present(rowq, v, kSharedTol)) continue;
        if (lattice_like(row0, v) || lattice_like(rowq, v)) continue;
        shared.push_back(v);
    }

    auto verify = [&](const Vec& x) {
        if (cell_margin(*ctx.cell, x) <= kCellMargin) return false;
        for (const auto& p : ctx.nset->points) {
            const double d = dist(x, p);
            if (d > range - 2.0 * kSharedTol) continue;  // beyond certified row coverage
            if (!value_present(row0, d, kSharedTol) || !value_present(rowq, d, kSharedTol))
                return false;
        }
        return true;
    };

    std::vector<Vec> accepted;
    const double r_max = ctx.covering_radius * (1.0 + 1e-9);
    for (double d0 : shared) {
        if (d0 > r_max) break;
        const double vbound = d0 + ctx.nset->radius + kSharedTol;
        std::vector<double> vcands;
        for (double v : shared)
            if (v > d0 + kSharedTol && v <= vbound) vcands.push_back(v);

        if (n == 2) {
            for (const auto& p : ctx.nset->points) {
                const double plen = norm(p);
                for (double v : vcands) {
                    if (std::abs(plen - v) > d0 + kSharedTol || v + d0 < plen - kSharedTol)
                        continue;  // spheres cannot meet
                    // intersect |x| = d0 with the plane 2 p.x = |p|^2 + d0^2 - v^2
                    const double c = 0.5 * (norm2(p) + d0 * d0 - v * v) / plen;
                    const double beta2 = d0 * d0 - c * c;
                    if (beta2 < -1e-12) continue;
                    const double beta = std::sqrt(std::max(beta2, 0.0));
                    const Vec unit{p[0] / plen, p[1] / plen};
                    const Vec perp{-unit[1], unit[0]};
                    for (double s : {beta, -beta}) {
                        const Vec x{c * unit[0] + s * perp[0], c * unit[1] + s * perp[1]};
                        if (verify(x)) accepted.push_back(x);
                        if (beta == 0.0) break;
                    }
                }
            }
        } else {
            const auto& pts = ctx.nset->points;
            for (std::size_t ia = 0; ia < pts.size(); ++ia) {
                for (std::size_t ib = 0; ib < pts.size(); ++ib) {
                    if (ia == ib) continue;
                    const Vec &pa = pts[ia], &pb = pts[ib];
                    Vec w{pa[1] * pb[2] - pa[2] * pb[1], pa[2] * pb[0] - pa[0] * pb[2],
                          pa[0] * pb[1] - pa[1] * pb[0]};
                    const double wlen = norm(w);
                    if (wlen < 1e-9 * norm(pa) * norm(pb)) continue;  // parallel
                    for (double& wc : w) wc /= wlen;
                    const double palen = norm(pa), pblen = norm(pb);
                    for (std::size_t va = 0; va < vcands.size(); ++va) {
                        const double da = vcands[va];
                        if (std::abs(palen - da) > d0 + kSharedTol || da + d0 < palen - kSharedTol)
                            continue;
                        for (std::size_t vb = va + 1; vb < vcands.size(); ++vb) {
                            const double db = vcands[vb];
                            if (std::abs(pblen - db) > d0 + kSharedTol ||
                                db + d0 < pblen - kSharedTol)
                                continue;
                            // planes from subtracting the center sphere from each
                            // neighbor sphere, then the |x| = d0 quadratic on the line
                            const double ca = 0.5 * (norm2(pa) + d0 * d0 - da * da);
                            const double cb = 0.5 * (norm2(pb) + d0 * d0 - db * db);
                            // particular solution x0 = alpha pa + beta pb
                            const double g11 = norm2(pa), g12 = dot(pa, pb), g22 = norm2(pb);
                            const double det = g11 * g22 - g12 * g12;
                            if (std::abs(det) < 1e-12 * g11 * g22) continue;
                            const double alpha = (ca * g22 - cb * g12) / det;
                            const double beta = (cb * g11 - ca * g12) / det;
                            Vec x0(3);
                            for (int i = 0; i < 3; ++i) x0[i] = alpha * pa[i] + beta * pb[i];
                            const double b_half = dot(x0, w);
                            const double disc = b_half * b_half - (norm2(x0) - d0 * d0);
                            if (disc < -1e-12) continue;
                            const double root = std::sqrt(std::max(disc, 0.0));
                            for (double tline : {-b_half + root, -b_half - root}) {
                                Vec x(3);
                                for (int i = 0; i < 3; ++i) x[i] = x0[i] + tline * w[i];
                                if (verify(x)) accepted.push_back(x);
                                if (root == 0.0) break;
                            }
                        }
                    }
                }
            }
        }
    }

    // cluster accepted positions into distinct candidates
    std::sort(accepted.begin(), accepted.end());
    std::vector<Vec> centers;
    for (const auto& x : accepted) {
        bool fresh = true;
        for (const auto& c : centers)
            if (dist(c, x) < kClusterSep) {
                fresh = false;
                break;
            }
        if (fresh) centers.push_back(x);
    }
    return centers;
}

}  // namespace

NeighborSet neighbor_set(const Lattice& lattice) {
    const int n = lattice.dim();
    if (n < 2 || n > 3) throw InputError("neighbor set supports dimensions 2 and 3");
    const VoronoiCell cell = voronoi_cell(lattice);
    const double R = cell.covering_radius;
    const auto cols = reduced_columns(lattice);
    const double hmin = Lattice(n, reduce_basis(lattice)).min_height();

    // Candidate pool capped at twice the covering radius: the nearest-neighbor
    // requirement is evaluated within this ball, which keeps the set bounded
    // even for cells whose literal 4th-nearest neighbor sticks out further.
    std::vector<Vec> pool = lattice_ball(cols, hmin, 2.0 * R * (1.0 + 1e-9));
    std::vector<std::pair<double, const Vec*>> by_norm;
    for (const auto& p : pool)
        if (norm2(p) > 0.0) by_norm.emplace_back(norm(p), &p);
    std::sort(by_norm.begin(), by_norm.end());

    // sample points of the closed Voronoi domain: vertices plus a grid
    std::vector<Vec> samples = cell.vertices;
    Vec lo(n, 0.0), hi(n, 0.0);
    for (const auto& v : cell.vertices)
        for (int i = 0; i < n; ++i) {
            lo[i] = std::min(lo[i], v[i]);
            hi[i] = std::max(hi[i], v[i]);
        }
    const int grid = 20;
    std::vector<int> g(n, 0);
    while (true) {
        Vec x(n);
        for (int i = 0; i < n; ++i)
            x[i] = lo[i] + (hi[i] - lo[i]) * (g[i] + 0.5) / grid;
        if (cell_margin(cell, x) >= 0.0) samples.push_back(std::move(x));
        int i = 0;
        while (i < n && g[i] == grid - 1) g[i++] = 0;
        if (i == n) break;
        ++g[i];
    }

    const double tie = 1e-9 * (1.0 + R);
    double needed_radius = 0.0;
    std::vector<std::pair<double, double>> dist_norm;  // (distance to q, |p|)
    for (const auto& q : samples) {
        dist_norm.clear();
        dist_norm.emplace_back(norm(q), 0.0);  // the origin itself
        for (const auto& [plen, p] : by_norm) dist_norm.emplace_back(dist(q, *p), plen);
        std::nth_element(dist_norm.begin(), dist_norm.begin() + n, dist_norm.end());
        const double dstar =
            std::max_element(dist_norm.begin(), dist_norm.begin() + n + 1,
                             [](const auto& a, const auto& b) { return a.first < b.first; })
                ->first;
        // mandatory: strictly nearer than the (n+1)-th distance; ties filled
        // by the smallest available |p|
        int slots = n + 1;
        std::vector<double> tied;
        for (const auto& [d, plen] : dist_norm) {
            if (d < dstar - tie) {
                --slots;
                needed_radius = std::max(needed_radius, plen);
            } else if (d <= dstar + tie) {
                tied.push_back(plen);
            }
        }
        std::sort(tied.begin(), tied.end());
        for (int s = 0; s < slots && s < static_cast<int>(tied.size()); ++s)
            needed_radius = std::max(needed_radius, tied[s]);
    }

    // grow until the chosen ball also spans space
    auto rank_of = [&](double radius) {
        std::vector<const Vec*> chosen;
        for (const auto& [plen, p] : by_norm)
            if (plen <= radius * (1.0 + 1e-12)) chosen.push_back(p);
        // Gram-based rank
        int rank = 0;
        std::vector<Vec> basis;
        for (const Vec* p : chosen) {
            Vec r = *p;
            for (const auto& b : basis) {
                const double proj = dot(r, b) / norm2(b);
                for (int i = 0; i < n; ++i) r[i] -= proj * b[i];
            }
            if (norm(r) > 1e-9) {
                basis.push_back(r);
                if (++rank == n) break;
            }
        }
        return rank;
    };
    for (const auto& [plen, p] : by_norm) {
        if (plen >= needed_radius && rank_of(std::max(needed_radius, plen)) == n) {
            needed_radius = std::max(needed_radius, plen);
            break;
        }
    }

    if (needed_radius > 2.0 * R * (1.0 + 1e-6))
        throw NumericError("neighbor set radius exceeds twice the covering radius");  // unreachable

    NeighborSet out;
    out.radius = needed_radius;
    for (const auto& [plen, p] : by_norm)
        if (plen <= needed_radius * (1.0 + 1e-12) + 1e-12) out.points.push_back(*p);
    return out;
}

BasisDistances basis_distances(const Vec& q, const NeighborSet& nset, const Lattice& lattice) {
    const int n = lattice.dim();
    const VoronoiCell cell = voronoi_cell(lattice);
    if (norm(q) <= 1e-12 * (1.0 + nset.radius))
        throw InputError("basis distances: the origin is the lattice point itself");
    if (cell_margin(cell, q) <= kCellMargin)
        throw InputError("basis distances: point is not strictly inside the open Voronoi domain");

    const auto& pts = nset.points;
    const int count = static_cast<int>(pts.size());
    if (count < n) throw NumericError("neighbor set too small");

    BasisDistances best;
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    while (true) {
        std::vector<const Vec*> tuple;
        for (int i = 0; i < n; ++i) tuple.push_back(&pts[idx[i]]);
        if (linearly_independent(tuple)) {
            std::vector<std::pair<double, const Vec*>> by_dist;
            for (const Vec* p : tuple) by_dist.emplace_back(dist(q, *p), p);
            std::sort(by_dist.begin(), by_dist.end());
            std::vector<double> dists;
            for (const auto& [d, p] : by_dist) dists.push_back(d);
            if (best.distances.empty() ||
                std::lexicographical_compare(dists.begin(), dists.end(), best.distances.begin(),
                                             best.distances.end())) {
                best.distances = dists;
                best.points.clear();
                for (const auto& [d, p] : by_dist) best.points.push_back(*p);
            }
        }
        int pos = n - 1;
        while (pos >= 0 && idx[pos] == count - n + pos) --pos;
        if (pos < 0) break;
        ++idx[pos];
        for (int r = pos + 1; r < n; ++r) idx[r] = idx[r - 1] + 1;
    }
    if (best.distances.empty()) throw NumericError("no linearly independent tuple found");
    return best;
}

namespace {

bool is_period(const PeriodicSet& set, const std::vector<Vec>& motif_cart, const Vec& v) {
    const double tol = 1e-9 * (1.0 + norm(v));
    for (const auto& p : motif_cart) {
        Vec shifted(p);
        for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] += v[i];
        bool matched = false;
        for (const auto& q : motif_cart) {
            Vec d(shifted);
            for (std::size_t i = 0; i < d.size(); ++i) d[i] -= q[i];
            if (norm(min_norm_representative(set.lattice(), d)) <= tol) {
                matched = true;
                break;
            }
        }
        if (!matched) return false;
    }
    return true;
}

// Distances from `from` to every set point within `radius`, sorted.
std::vector<double> distance_list(const std::vector<Vec>& cloud, const Vec& from, double radius) {
    std::vector<double> out;
    for (const auto& p : cloud) {
        const double d = dist(from, p);
        if (d > 0.0 && d <= radius) out.push_back(d);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

GenericityReport check_distance_generic(const PeriodicSet& set) {
    const int n = set.dim();
    if (n < 2 || n > 3) throw InputError("genericity check supports dimensions 2 and 3");
    const int m = set.motif_size();

    const VoronoiCell cell = voronoi_cell(set.lattice());
    const double R = cell.covering_radius;
    const NeighborSet nset = neighbor_set(set.lattice());
    const auto cols = reduced_columns(set.lattice());
    const double hmin = Lattice(n, reduce_basis(set.lattice())).min_height();
    const auto motif_cart = to_cartesian(set);
    const double len_tol = 1e-9 * (1.0 + 2.0 * R);

    GenericityReport report;
    auto violate = [&](char cond, std::string desc, std::vector<Vec> witness) {
        report.is_generic = false;
        report.violations.push_back({cond, std::move(desc), std::move(witness)});
    };

    const SearchContext ctx{n, &cell, &nset, R};
    const double row_radius = 2.0 * (R + nset.radius) * 1.02;
    // cloud must cover balls of row_radius around every representative
    const auto translations = lattice_ball(cols, hmin, row_radius + 2.5 * R);

    for (int base = 0; base < m; ++base) {
        // shift the chosen motif point to the origin
        std::vector<Vec> reps(m);
        for (int i = 0; i < m; ++i) {
            Vec d(n);
            for (int c = 0; c < n; ++c) d[c] = motif_cart[i][c] - motif_cart[base][c];
            reps[i] = min_norm_representative(set.lattice(), d);
        }
        // motif entries that repeat the origin orbit under a period (they
        // appear when the set is described over a non-primitive cell) are
        // exempt from the point conditions
        std::vector<char> period_rep(m, 0);
        for (int i = 0; i < m; ++i)
            if (i != base && is_period(set, motif_cart, reps[i])) period_rep[i] = 1;

        // (a) no orthogonal vectors to motif points in the Voronoi domain
        for (int i = 0; i < m; ++i) {
            if (i == base || period_rep[i]) continue;
            for (int j = i + 1; j < m; ++j) {
                if (j == base || period_rep[j]) continue;
                const double cosv = dot(reps[i], reps[j]) / (norm(reps[i]) * norm(reps[j]));
                if (std::abs(cosv) <= 1e-9)
                    violate('a', "orthogonal vectors to motif points", {reps[i], reps[j]});
            }
        }

        // cloud of set points around the origin (positions relative to base)
        std::vector<Vec> cloud;
        for (const auto& t : translations)
            for (int i = 0; i < m; ++i) {
                Vec p(n);
                for (int c = 0; c < n; ++c) p[c] = reps[i][c] + t[c];
                cloud.push_back(std::move(p));
            }

        // (b) coincident or doubled lengths only for periods
        std::vector<Vec> vecs;
        for (int i = 0; i < m; ++i) {
            if (i != base && !(cell_margin(cell, reps[i]) > 0.0)) continue;
            for (const auto& bpt : cloud) {
                Vec u(n);
                for (int c = 0; c < n; ++c) u[c] = bpt[c] - reps[i][c];
                const double len = norm(u);
                if (len == 0.0 || len > 2.0 * R * (1.0 + 1e-9)) continue;
                if (norm(bpt) > 3.0 * R * (1.0 + 1e-9)) continue;
                if (cell_margin(cell, bpt, 3.0) < 0.0) continue;  // outside 3x domain
                bool fresh = true;
                for (const auto& w : vecs)
                    if (dist(w, u) <= len_tol) {
                        fresh = false;
                        break;
                    }
                if (fresh) vecs.push_back(std::move(u));
            }
        }
        for (std::size_t i = 0; i < vecs.size(); ++i) {
            for (std::size_t j = 0; j < vecs.size(); ++j) {
                if (i == j) continue;
                const Vec &u = vecs[i], &v = vecs[j];
                const double lu = norm(u), lv = norm(v);
                for (int l = 1; l <= 2; ++l) {
                    if (l == 1 && j < i) continue;  // unordered for equal lengths
                    if (std::abs(lu - l * lv) > len_tol) continue;
                    double plus = 0.0, minus = 0.0;
                    for (int c = 0; c < n; ++c) {
                        plus = std::max(plus, std::abs(u[c] - l * v[c]));
                        minus = std::max(minus, std::abs(u[c] + l * v[c]));
                    }
                    const bool aligned = std::min(plus, minus) <= len_tol;
                    if (!aligned)
                        violate('b', l == 1 ? "equal lengths of unrelated vectors"
                                            : "doubled length of unrelated vectors",
                                {u, v});
                    else if (l == 2 && !is_period(set, motif_cart, v))
                        violate('b', "doubled length of a non-period vector", {u, v});
                }
            }
        }

        // (c) placements from rows must be unique up to central symmetry
        const auto row0 = distance_list(cloud, Vec(n, 0.0), row_radius);
        for (int i = 0; i < m; ++i) {
            if (i == base || period_rep[i]) continue;
            const auto rowq = distance_list(cloud, reps[i], row_radius);
            const auto centers = find_placements(ctx, row0, rowq);
            bool found_self = false;
            for (const auto& cpos : centers) {
                // acceptable up to central symmetry and up to a period of the
                // set (non-primitive descriptions repeat each orbit in the cell)
                Vec diff(n), sum(n);
                for (int c = 0; c < n; ++c) {
                    diff[c] = cpos[c] - reps[i][c];
                    sum[c] = cpos[c] + reps[i][c];
                }
                if (is_period(set, motif_cart, diff) || is_period(set, motif_cart, sum))
                    found_self = true;
                else
                    violate('c', "spurious sphere-intersection placement", {cpos, reps[i]});
            }
            if (!found_self)
                violate('c', "sphere intersections do not recover the motif point", {reps[i]});
        }
    }
    return report;
}

std::string genericity_report_to_json(const GenericityReport& report) {
    nlohmann::json j;
    j["is_generic"] = report.is_generic;
    j["violations"] = nlohmann::json::array();
    for (const auto& v : report.violations) {
        nlohmann::json item;
        item["condition"] = std::string(1, v.condition);
        item["description"] = v.description;
        item["witness"] = v.witness;
        j["violations"].push_back(item);
    }
    return j.dump(2) + "\n";
}

std::string trace_to_json(const ReconstructionTrace& trace) {
    nlohmann::json j;
    j["covering_radius"] = trace.covering_radius;
    j["neighbor_set_size"] = trace.neighbor_set_size;
    j["placements"] = nlohmann::json::array();
    for (const auto& p : trace.placements) {
        nlohmann::json item;
        item["row"] = p.row;
        item["position"] = p.position;
        item["candidates"] = p.candidates;
        j["placements"].push_back(item);
    }
    return j.dump(2) + "\n";
}

PeriodicSet reconstruct_motif(const Lattice& lattice, int m, const PDDMatrix& matrix,
                              ReconstructionTrace* trace) {
    const int n = lattice.dim();
    if (n < 2 || n > 3) throw InputError("reconstruction supports dimensions 2 and 3");
    if (m < 1) throw InputError("motif size must be positive");

    // expand weighted rows to m rows of weight 1/m
    std::vector<const std::vector<double>*> rows;
    for (const auto& row : matrix.rows()) {
        const Rational copies = row.weight * Rational(m);
        if (copies.den() != 1)
            throw InputError("PDD weights are not multiples of 1/m for the given motif size");
        for (std::int64_t c = 0; c < copies.num(); ++c) rows.push_back(&row.distances);
    }
    if (static_cast<int>(rows.size()) != m)
        throw InputError("PDD weights do not expand to the given motif size");

    if (m == 1) return PeriodicSet(lattice, Motif(n, {Vec(n, 0.0)}));

    const VoronoiCell cell = voronoi_cell(lattice);
    const double R = cell.covering_radius;
    for (const auto* row : rows)
        if (row->back() <= 2.0 * R * (1.0 + 1e-9))
            throw InputError(
                "k too small for reconstruction: twice the covering radius must stay below the "
                "last PDD column");
    const NeighborSet nset = neighbor_set(lattice);
    const SearchContext ctx{n, &cell, &nset, R};

    if (trace) {
        trace->covering_radius = R;
        trace->neighbor_set_size = static_cast<int>(nset.points.size());
        trace->placements.clear();
    }

    const std::vector<double>& row0 = *rows[0];
    std::vector<Vec> placed{Vec(n, 0.0)};
    std::vector<const std::vector<double>*> placed_rows{rows[0]};

    for (int i = 1; i < m; ++i) {
        const auto centers = find_placements(ctx, row0, *rows[i]);
        if (centers.empty())
            throw NumericError("reconstruction: no consistent placement for row " +
                               std::to_string(i) + " (input not realizable or not generic)");
        if (centers.size() > 2)
            throw NumericError("reconstruction: ambiguous placement for row " + std::to_string(i) +
                               " (genericity violation)");

        std::vector<Vec> viable;
        if (i == 1) {
            if (centers.size() == 2) {
                Vec neg(centers[0]);
                for (double& x : neg) x = -x;
                if (dist(neg, centers[1]) > kClusterSep)
                    throw NumericError(
                        "reconstruction: two placements not related by central symmetry "
                        "(genericity violation)");
            }
            // the global point-reflection choice: fix it once, deterministically
            viable.push_back(*std::max_element(centers.begin(), centers.end()));
        } else {
            for (const auto& cand : centers) {
                bool ok = true;
                for (std::size_t j = 1; j < placed.size() && ok; ++j) {
                    const double d = dist(cand, placed[j]);
                    if (!value_present(*rows[i], d, kSharedTol) ||
                        !value_present(*placed_rows[j], d, kSharedTol))
                        ok = false;
                }
                if (ok) viable.push_back(cand);
            }
            if (viable.empty())
                throw NumericError("reconstruction: no placement consistent with cross distances "
                                   "for row " +
                                   std::to_string(i));
            if (viable.size() > 1)
                throw NumericError("reconstruction: mirror ambiguity for row " + std::to_string(i) +
                                   " (orthogonality violation)");
        }
        placed.push_back(viable.front());
        placed_rows.push_back(rows[i]);
        if (trace) trace->placements.push_back({i, viable.front(), static_cast<int>(centers.size())});
    }

    std::vector<Vec> frac;
    for (const auto& p : placed) {
        Vec f = lattice.to_fractional(p);
        for (double& c : f) c = wrap_unit(c);
        frac.push_back(std::move(f));
    }
    return PeriodicSet(lattice, Motif(n, frac));
}

}  // namespace pdd
