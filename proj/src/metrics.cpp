#include "pdd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include <json.hpp>

#include "pdd/nnsearch.hpp"

namespace pdd {

double row_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw InputError("row length mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double amd_distance(const AMDVector& a, const AMDVector& b) {
    if (a.k() != b.k()) throw InputError("AMD length mismatch");
    return row_distance(a.values(), b.values());
}

std::string flow_to_json(const Flow& flow) {
    nlohmann::json j;
    j["cost"] = flow.cost;
    j["entries"] = nlohmann::json::array();
    for (const auto& e : flow.entries) j["entries"].push_back({e.from, e.to, e.amount});
    return j.dump(2) + "\n";
}

double packing_radius(const PeriodicSet& set) {
    const DistanceMatrix dm = neighbor_distances(set, 1);
    double m = dm.rows[0][0];
    for (const auto& r : dm.rows) m = std::min(m, r[0]);
    return 0.5 * m;
}

double packing_radius(const FiniteSet& set) {
    const DistanceMatrix dm = neighbor_distances(set, 1);
    double m = dm.rows[0][0];
    for (const auto& r : dm.rows) m = std::min(m, r[0]);
    return 0.5 * m;
}

namespace {

// Balanced transportation problem with integer supplies/demands and dense
// double costs, solved by network simplex on the basis tree. Supplies are
// perturbed (Charnes) so every basic solution is nondegenerate: no cycling,
// unique leaving arc, strict cost decrease per pivot.
class TransportSimplex {
public:
    TransportSimplex(std::vector<std::int64_t> supply, std::vector<std::int64_t> demand,
                     const std::vector<double>& cost)
        : a_(static_cast<int>(supply.size())),
          b_(static_cast<int>(demand.size())),
          cost_(cost) {
        // Scale by (a+1), add 1 to every supply and a to the last demand.
        supply_.resize(a_);
        demand_.resize(b_);
        for (int i = 0; i < a_; ++i) supply_[i] = (a_ + 1) * supply[i] + 1;
        for (int j = 0; j < b_; ++j) demand_[j] = (a_ + 1) * demand[j];
        demand_[b_ - 1] += a_;
        original_supply_ = std::move(supply);
        original_demand_ = std::move(demand);
    }

    // Returns basic arcs (i, j, flow) for the *unperturbed* problem.
    std::vector<std::tuple<int, int, std::int64_t>> solve() {
        northwest_init();
        double max_cost = 0.0;
        for (double c : cost_) max_cost = std::max(max_cost, c);
        const double eps = 1e-13 * (1.0 + max_cost);

        std::vector<double> pot(a_ + b_);
        while (true) {
            compute_potentials(pot);
            int enter_i = -1, enter_j = -1;
            double best = -eps;
            for (int i = 0; i < a_; ++i) {
                const double pi = pot[i];
                const double* row = cost_.data() + static_cast<std::size_t>(i) * b_;
                for (int j = 0; j < b_; ++j) {
                    const double rc = row[j] - pi - pot[a_ + j];
                    if (rc < best) {
                        best = rc;
                        enter_i = i;
                        enter_j = j;
                    }
                }
            }
            if (enter_i < 0) break;
            pivot(enter_i, enter_j);
        }
        return resolve_unperturbed();
    }

private:
    struct Arc {
        int i, j;
        std::int64_t flow;
    };

    void northwest_init() {
        std::vector<std::int64_t> s(supply_), d(demand_);
        int i = 0, j = 0;
        while (i < a_ && j < b_) {
            const std::int64_t f = std::min(s[i], d[j]);
            arcs_.push_back({i, j, f});
            s[i] -= f;
            d[j] -= f;
            if (s[i] == 0 && (i + 1 < a_ || d[j] > 0)) ++i;
            else ++j;
        }
    }

    void rebuild_adjacency() {
        adj_.assign(a_ + b_, {});
        for (int e = 0; e < static_cast<int>(arcs_.size()); ++e) {
            adj_[arcs_[e].i].push_back(e);
            adj_[a_ + arcs_[e].j].push_back(e);
        }
    }

    void compute_potentials(std::vector<double>& pot) {
        rebuild_adjacency();
        pot.assign(a_ + b_, 0.0);
        std::vector<int> stack{0};
        std::vector<char> seen(a_ + b_, 0);
        seen[0] = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int e : adj_[u]) {
                const Arc& arc = arcs_[e];
                const int v = (u == arc.i) ? a_ + arc.j : arc.i;
                if (seen[v]) continue;
                seen[v] = 1;
                pot[v] = cost_[static_cast<std::size_t>(arc.i) * b_ + arc.j] - pot[u];
                stack.push_back(v);
            }
        }
    }

    // Note: potentials satisfy pot[i] + pot[a+j] == cost(i,j) on basic arcs.
    void pivot(int enter_i, int enter_j) {
        // Tree path from sink enter_j back to source enter_i.
        const int src = enter_i, dst = a_ + enter_j;
        std::vector<int> parent_arc(a_ + b_, -1), parent_node(a_ + b_, -1);
        std::vector<int> stack{dst};
        parent_node[dst] = dst;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            if (u == src) break;
            for (int e : adj_[u]) {
                const Arc& arc = arcs_[e];
                const int v = (u == arc.i) ? a_ + arc.j : arc.i;
                if (parent_node[v] >= 0) continue;
                parent_node[v] = u;
                parent_arc[v] = e;
                stack.push_back(v);
            }
        }

        // The cycle runs enter_i -> enter_j, then back along the tree path.
        // A path arc traversed source->sink in cycle direction gains theta,
        // the others lose it; the unique minimum loser leaves the basis.
        std::int64_t theta = INT64_MAX;
        int leave = -1;
        for (int u = src; u != dst; u = parent_node[u]) {
            const int e = parent_arc[u];
            const Arc& arc = arcs_[e];
            const bool gains = (u == a_ + arc.j);  // cycle enters the sink end last
            if (!gains && arc.flow < theta) {
                theta = arc.flow;
                leave = e;
            }
        }
        for (int u = src; u != dst; u = parent_node[u]) {
            const int e = parent_arc[u];
            const bool gains = (u == a_ + arcs_[e].j);
            arcs_[e].flow += gains ? theta : -theta;
        }
        arcs_[leave] = {enter_i, enter_j, theta};
        rebuild_adjacency();
    }

    std::vector<std::tuple<int, int, std::int64_t>> resolve_unperturbed() {
        // Re-solve the tree system with the original supplies by stripping leaves.
        rebuild_adjacency();
        const int n = a_ + b_;
        std::vector<std::int64_t> value(n);
        for (int i = 0; i < a_; ++i) value[i] = original_supply_[i];
        for (int j = 0; j < b_; ++j) value[a_ + j] = original_demand_[j];
        std::vector<int> degree(n);
        std::vector<char> arc_done(arcs_.size(), 0), node_done(n, 0);
        for (int u = 0; u < n; ++u) degree[u] = static_cast<int>(adj_[u].size());
        std::vector<int> leaves;
        for (int u = 0; u < n; ++u)
            if (degree[u] == 1) leaves.push_back(u);
        std::vector<std::tuple<int, int, std::int64_t>> out;
        out.reserve(arcs_.size());
        while (!leaves.empty()) {
            const int u = leaves.back();
            leaves.pop_back();
            if (node_done[u]) continue;
            node_done[u] = 1;
            for (int e : adj_[u]) {
                if (arc_done[e]) continue;
                arc_done[e] = 1;
                const Arc& arc = arcs_[e];
                const int v = (u == arc.i) ? a_ + arc.j : arc.i;
                const std::int64_t f = value[u];
                if (f < 0) throw NumericError("transport tree produced negative flow");
                out.emplace_back(arc.i, arc.j, f);
                value[u] = 0;
                value[v] -= f;
                if (--degree[v] == 1) leaves.push_back(v);
            }
        }
        return out;
    }

    int a_, b_;
    std::vector<double> cost_;
    std::vector<std::int64_t> supply_, demand_;
    std::vector<std::int64_t> original_supply_, original_demand_;
    std::vector<Arc> arcs_;
    std::vector<std::vector<int>> adj_;
};

}  // namespace

EmdResult emd(const PDDMatrix& p, const PDDMatrix& q) {
    if (p.k() != q.k()) throw InputError("PDD column counts differ");
    const int a = p.row_count();
    const int b = q.row_count();

    EmdResult result;
    if (a == 1 || b == 1) {
        // One side is a single row: the only feasible flow follows the other
        // side's weights.
        double total = 0.0;
        for (int i = 0; i < a; ++i) {
            for (int j = 0; j < b; ++j) {
                const double w = (a == 1) ? q.row(j).weight.to_double() : p.row(i).weight.to_double();
                const double c = row_distance(p.row(i).distances, q.row(j).distances);
                result.flow.entries.push_back({i, j, w});
                total += w * c;
            }
        }
        result.distance = result.flow.cost = total;
        return result;
    }

    // Integer supplies: scale rational weights to a common denominator.
    std::int64_t scale = 1;
    for (int i = 0; i < a; ++i) scale = std::lcm(scale, p.row(i).weight.den());
    for (int j = 0; j < b; ++j) scale = std::lcm(scale, q.row(j).weight.den());
    std::vector<std::int64_t> supply(a), demand(b);
    std::int64_t sum_s = 0, sum_d = 0;
    for (int i = 0; i < a; ++i) {
        supply[i] = p.row(i).weight.num() * (scale / p.row(i).weight.den());
        sum_s += supply[i];
    }
    for (int j = 0; j < b; ++j) {
        demand[j] = q.row(j).weight.num() * (scale / q.row(j).weight.den());
        sum_d += demand[j];
    }
    if (sum_s != scale || sum_d != scale)
        throw InputError("PDD weights do not sum to 1");

    std::vector<double> cost(static_cast<std::size_t>(a) * b);
    for (int i = 0; i < a; ++i)
        for (int j = 0; j < b; ++j)
            cost[static_cast<std::size_t>(i) * b + j] = row_distance(p.row(i).distances, q.row(j).distances);

    TransportSimplex simplex(std::move(supply), std::move(demand), cost);
    auto basic = simplex.solve();
    std::sort(basic.begin(), basic.end());
    double total = 0.0;
    for (const auto& [i, j, f] : basic) {
        if (f == 0) continue;
        const double amount = static_cast<double>(f) / static_cast<double>(scale);
        result.flow.entries.push_back({i, j, amount});
        total += amount * cost[static_cast<std::size_t>(i) * b + j];
    }
    result.distance = result.flow.cost = total;
    return result;
}

}  // namespace pdd
