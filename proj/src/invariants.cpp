#include "pdd/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>

#include <json.hpp>

namespace pdd {

bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

PDDMatrix::PDDMatrix(int k, std::vector<PddRow> rows) : k_(k), rows_(std::move(rows)) {
    if (k_ < 1) throw InputError("PDD needs k >= 1");
    if (rows_.empty()) throw InputError("PDD needs at least one row");
    Rational total(0);
    for (const auto& r : rows_) {
        if (static_cast<int>(r.distances.size()) != k_)
            throw InputError("PDD row length does not match k");
        if (!(Rational(0) < r.weight)) throw InputError("PDD weights must be positive");
        for (int i = 0; i + 1 < k_; ++i)
            if (r.distances[i] > r.distances[i + 1])
                throw InputError("PDD row distances must be non-decreasing");
        total = total + r.weight;
    }
    if (total != Rational(1)) throw InputError("PDD weights must sum to exactly 1");
    for (std::size_t i = 0; i + 1 < rows_.size(); ++i)
        if (!lex_less(rows_[i].distances, rows_[i + 1].distances))
            throw InputError("PDD rows must be strictly increasing lexicographically");
}

bool PDDMatrix::operator==(const PDDMatrix& o) const {
    if (k_ != o.k_ || rows_.size() != o.rows_.size()) return false;
    for (std::size_t i = 0; i < rows_.size(); ++i)
        if (rows_[i].weight != o.rows_[i].weight || rows_[i].distances != o.rows_[i].distances)
            return false;
    return true;
}

AMDVector::AMDVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw InputError("AMD vector must be non-empty");
    for (std::size_t i = 0; i + 1 < values_.size(); ++i)
        if (values_[i] > values_[i + 1])
            throw InputError("AMD vector must be non-decreasing");
}

namespace {

double linf(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

PDDMatrix pdd_from_distances(const DistanceMatrix& dm, double collapse_tol) {
    if (collapse_tol < 0.0) throw InputError("collapse tolerance must be non-negative");
    const int m = static_cast<int>(dm.rows.size());

    std::vector<int> group(m);
    int group_count = 0;
    if (collapse_tol == 0.0) {
        // Bit-equal grouping via sort.
        std::vector<int> order(m);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return dm.rows[a] < dm.rows[b]; });
        for (int i = 0; i < m; ++i) {
            if (i > 0 && dm.rows[order[i]] == dm.rows[order[i - 1]])
                group[order[i]] = group[order[i - 1]];
            else
                group[order[i]] = group_count++;
        }
    } else {
        UnionFind uf(m);
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j)
                if (linf(dm.rows[i], dm.rows[j]) <= collapse_tol) uf.unite(i, j);
        std::vector<int> root_to_group(m, -1);
        for (int i = 0; i < m; ++i) {
            const int r = uf.find(i);
            if (root_to_group[r] < 0) root_to_group[r] = group_count++;
            group[i] = root_to_group[r];
        }
    }

    // One row per group: the lexicographically smallest member, weight count/m.
    std::vector<PddRow> rows(group_count);
    std::vector<int> counts(group_count, 0);
    for (int i = 0; i < m; ++i) {
        auto& row = rows[group[i]];
        if (counts[group[i]] == 0 || lex_less(dm.rows[i], row.distances))
            row.distances = dm.rows[i];
        ++counts[group[i]];
    }
    for (int g = 0; g < group_count; ++g) rows[g].weight = Rational(counts[g], m);
    std::sort(rows.begin(), rows.end(),
              [](const PddRow& a, const PddRow& b) { return lex_less(a.distances, b.distances); });
    return PDDMatrix(dm.k, std::move(rows));
}

PDDMatrix pdd(const PeriodicSet& set, int k, double collapse_tol) {
    return pdd_from_distances(neighbor_distances(set, k), collapse_tol);
}

PDDMatrix pdd(const FiniteSet& set, int k, double collapse_tol) {
    return pdd_from_distances(neighbor_distances(set, k), collapse_tol);
}

PDDMatrix pdd(const Structure& set, int k, double collapse_tol) {
    return std::visit([&](const auto& s) { return pdd(s, k, collapse_tol); }, set);
}

AMDVector amd(const PDDMatrix& matrix) {
    std::vector<double> values(matrix.k(), 0.0);
    for (const auto& row : matrix.rows()) {
        const double w = row.weight.to_double();
        for (int j = 0; j < matrix.k(); ++j) values[j] += w * row.distances[j];
    }
    return AMDVector(std::move(values));
}

double unit_ball_volume(int n) {
    return std::pow(3.14159265358979323846, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

double ppc(const PeriodicSet& set) {
    const int n = set.dim();
    return std::pow(set.lattice().volume() / (set.motif_size() * unit_ball_volume(n)), 1.0 / n);
}

// --- serialization ---

namespace {

void append_bytes(std::vector<std::uint8_t>& out, const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
}

template <typename T>
void append_val(std::vector<std::uint8_t>& out, T v) {
    append_bytes(out, &v, sizeof(T));
}

template <typename T>
T read_val(const std::uint8_t*& p, const std::uint8_t* end) {
    if (p + sizeof(T) > end) throw InputError("truncated binary record");
    T v;
    std::memcpy(&v, p, sizeof(T));
    p += sizeof(T);
    return v;
}

void check_magic(const std::uint8_t*& p, const std::uint8_t* end, const char* magic) {
    if (p + 4 > end || std::memcmp(p, magic, 4) != 0)
        throw InputError(std::string("bad magic, expected ") + magic);
    p += 4;
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string pdd_to_csv(const PDDMatrix& matrix) {
    std::string out;
    for (const auto& row : matrix.rows()) {
        out += fmt_double(row.weight.to_double());
        for (double d : row.distances) {
            out += ',';
            out += fmt_double(d);
        }
        out += '\n';
    }
    return out;
}

std::string amd_to_csv(const AMDVector& vec) {
    std::string out;
    for (int i = 0; i < vec.k(); ++i) {
        if (i) out += ',';
        out += fmt_double(vec.value(i));
    }
    out += '\n';
    return out;
}

std::vector<std::uint8_t> pdd_to_binary(const PDDMatrix& matrix) {
    std::vector<std::uint8_t> out;
    append_bytes(out, "PDDB", 4);
    append_val<std::uint32_t>(out, 1);  // version
    append_val<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.k()));
    append_val<std::uint64_t>(out, static_cast<std::uint64_t>(matrix.row_count()));
    for (const auto& row : matrix.rows()) {
        append_val<std::int64_t>(out, row.weight.num());
        append_val<std::int64_t>(out, row.weight.den());
        append_bytes(out, row.distances.data(), row.distances.size() * sizeof(double));
    }
    return out;
}

PDDMatrix pdd_from_binary(const std::uint8_t* data, std::size_t size) {
    const std::uint8_t* p = data;
    const std::uint8_t* end = data + size;
    check_magic(p, end, "PDDB");
    const auto version = read_val<std::uint32_t>(p, end);
    if (version != 1) throw InputError("unsupported PDD record version");
    const auto k = read_val<std::uint32_t>(p, end);
    const auto nrows = read_val<std::uint64_t>(p, end);
    std::vector<PddRow> rows;
    rows.reserve(nrows);
    for (std::uint64_t i = 0; i < nrows; ++i) {
        PddRow row;
        const auto num = read_val<std::int64_t>(p, end);
        const auto den = read_val<std::int64_t>(p, end);
        row.weight = Rational(num, den);
        row.distances.resize(k);
        if (p + k * sizeof(double) > end) throw InputError("truncated binary record");
        std::memcpy(row.distances.data(), p, k * sizeof(double));
        p += k * sizeof(double);
        rows.push_back(std::move(row));
    }
    return PDDMatrix(static_cast<int>(k), std::move(rows));
}

std::vector<std::uint8_t> amd_to_binary(const AMDVector& vec) {
    std::vector<std::uint8_t> out;
    append_bytes(out, "AMDB", 4);
    append_val<std::uint32_t>(out, 1);
    append_val<std::uint32_t>(out, static_cast<std::uint32_t>(vec.k()));
    append_bytes(out, vec.values().data(), vec.values().size() * sizeof(double));
    return out;
}

AMDVector amd_from_binary(const std::uint8_t* data, std::size_t size) {
    const std::uint8_t* p = data;
    const std::uint8_t* end = data + size;
    check_magic(p, end, "AMDB");
    const auto version = read_val<std::uint32_t>(p, end);
    if (version != 1) throw InputError("unsupported AMD record version");
    const auto k = read_val<std::uint32_t>(p, end);
    std::vector<double> values(k);
    if (p + k * sizeof(double) > end) throw InputError("truncated binary record");
    std::memcpy(values.data(), p, k * sizeof(double));
    return AMDVector(std::move(values));
}

std::string pdd_to_json(const PDDMatrix& matrix) {
    nlohmann::json j;
    j["k"] = matrix.k();
    j["rows"] = nlohmann::json::array();
    for (const auto& row : matrix.rows())
        j["rows"].push_back({{"weight", {row.weight.num(), row.weight.den()}},
                             {"distances", row.distances}});
    return j.dump(2) + "\n";
}

PDDMatrix pdd_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        std::vector<PddRow> rows;
        for (const auto& item : j.at("rows")) {
            PddRow row;
            row.weight = Rational(item.at("weight").at(0).get<std::int64_t>(),
                                  item.at("weight").at(1).get<std::int64_t>());
            row.distances = item.at("distances").get<std::vector<double>>();
            rows.push_back(std::move(row));
        }
        return PDDMatrix(j.at("k").get<int>(), std::move(rows));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("invalid PDD JSON: ") + e.what());
    }
}

std::string amd_to_json(const AMDVector& vec) {
    nlohmann::json j;
    j["k"] = vec.k();
    j["values"] = vec.values();
    return j.dump(2) + "\n";
}

}  // namespace pdd
