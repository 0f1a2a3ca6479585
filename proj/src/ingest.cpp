#include "pdd/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace pdd {

namespace {

struct Token {
    std::string text;
    int line;
    bool quoted;  // quoted or semicolon text field: never a control keyword
};

bool starts_with_ci(const std::string& s, const char* prefix) {
    std::size_t i = 0;
    for (; prefix[i]; ++i) {
        if (i >= s.size() || std::tolower(static_cast<unsigned char>(s[i])) != prefix[i])
            return false;
    }
    return true;
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::vector<Token> tokenize_cif(const std::string& text) {
    std::vector<Token> tokens;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool in_text_field = false;
    std::string text_field;
    int text_field_line = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (in_text_field) {
            if (!line.empty() && line[0] == ';') {
                tokens.push_back({text_field, text_field_line, true});
                in_text_field = false;
            } else {
                if (!text_field.empty()) text_field += '\n';
                text_field += line;
            }
            continue;
        }
        if (!line.empty() && line[0] == ';') {
            in_text_field = true;
            text_field = line.substr(1);
            text_field_line = lineno;
            continue;
        }
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            if (i >= line.size()) break;
            if (line[i] == '#') break;  // comment to end of line
            if (line[i] == '\'' || line[i] == '"') {
                const char q = line[i];
                std::size_t j = i + 1;
                std::string value;
                // closing quote must be followed by whitespace or end of line
                while (j < line.size()) {
                    if (line[j] == q &&
                        (j + 1 >= line.size() || std::isspace(static_cast<unsigned char>(line[j + 1]))))
                        break;
                    value += line[j++];
                }
                if (j >= line.size() && (line.empty() || line.back() != q))
                    throw InputError("unterminated quoted value at line " + std::to_string(lineno));
                tokens.push_back({value, lineno, true});
                i = j + 1;
            } else {
                std::size_t j = i;
                while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
                tokens.push_back({line.substr(i, j - i), lineno, false});
                i = j;
            }
        }
    }
    if (in_text_field) throw InputError("unterminated text field starting at line " + std::to_string(text_field_line));
    return tokens;
}

bool is_control(const Token& t) {
    if (t.quoted) return false;
    return starts_with_ci(t.text, "data_") || starts_with_ci(t.text, "loop_") ||
           (!t.text.empty() && t.text[0] == '_') || starts_with_ci(t.text, "stop_") ||
           starts_with_ci(t.text, "global_") || starts_with_ci(t.text, "save_");
}

}  // namespace

CifDocument parse_cif_document(const std::string& text, const std::string& source) {
    CifDocument doc;
    doc.source = source;
    const auto tokens = tokenize_cif(text);
    std::size_t i = 0;
    CifBlock* block = nullptr;
    while (i < tokens.size()) {
        const Token& tok = tokens[i];
        if (!tok.quoted && starts_with_ci(tok.text, "data_")) {
            doc.blocks.push_back(CifBlock{tok.text.substr(5), {}, {}});
            block = &doc.blocks.back();
            ++i;
            continue;
        }
        if (!block) throw InputError(source + ": content before the first data_ block (line " +
                                     std::to_string(tok.line) + ")");
        if (!tok.quoted && starts_with_ci(tok.text, "loop_")) {
            CifLoop loop;
            ++i;
            while (i < tokens.size() && !tokens[i].quoted && !tokens[i].text.empty() &&
                   tokens[i].text[0] == '_')
                loop.tags.push_back(lower(tokens[i++].text));
            if (loop.tags.empty())
                throw InputError(source + ": loop_ without tags at line " + std::to_string(tok.line));
            while (i < tokens.size() && !is_control(tokens[i])) {
                std::vector<CifValue> row;
                for (std::size_t c = 0; c < loop.tags.size(); ++c) {
                    if (i >= tokens.size() || is_control(tokens[i]))
                        throw InputError(source + ": loop row with wrong arity near line " +
                                         std::to_string(tokens[i - 1].line));
                    row.push_back({tokens[i].text, tokens[i].line});
                    ++i;
                }
                loop.rows.push_back(std::move(row));
            }
            block->loops.push_back(std::move(loop));
            continue;
        }
        if (!tok.quoted && !tok.text.empty() && tok.text[0] == '_') {
            if (i + 1 >= tokens.size() || is_control(tokens[i + 1]))
                throw InputError(source + ": tag " + tok.text + " without a value (line " +
                                 std::to_string(tok.line) + ")");
            block->items[lower(tok.text)] = {tokens[i + 1].text, tokens[i + 1].line};
            i += 2;
            continue;
        }
        throw InputError(source + ": unexpected token '" + tok.text + "' at line " +
                         std::to_string(tok.line));
    }
    if (doc.blocks.empty()) throw InputError(source + ": no data blocks");
    return doc;
}

// --- symmetry operators ---

namespace {

class ExprParser {
public:
    explicit ExprParser(const std::string& s) : s_(s) {}

    // one coordinate expression: signed terms over x,y,z and rational constants
    void parse_component(std::vector<Rational>& row, Rational& translation) {
        skip_space();
        bool first = true;
        while (!at_end()) {
            Rational sign(1);
            if (peek() == '+' || peek() == '-') {
                if (get() == '-') sign = Rational(-1);
                skip_space();
            } else if (!first) {
                throw InputError("expected '+' or '-' in symmetry expression");
            }
            first = false;
            parse_term(sign, row, translation);
            skip_space();
        }
        if (first) throw InputError("empty component in symmetry expression");
    }

private:
    void parse_term(Rational sign, std::vector<Rational>& row, Rational& translation) {
        skip_space();
        if (at_end()) throw InputError("dangling sign in symmetry expression");
        if (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.') {
            Rational value = sign * parse_number();
            skip_space();
            if (!at_end() && peek() == '/') {
                get();
                skip_space();
                value = value / parse_number();
                skip_space();
            }
            if (!at_end() && (peek() == '*' || is_var(peek()))) {
                if (peek() == '*') {
                    get();
                    skip_space();
                }
                const int v = var_index(get());
                row[v] = row[v] + value;
            } else {
                translation = translation + value;
            }
        } else if (is_var(peek())) {
            const int v = var_index(get());
            Rational coef = sign;
            skip_space();
            if (!at_end() && peek() == '/') {
                get();
                skip_space();
                coef = coef / parse_number();
            }
            row[v] = row[v] + coef;
        } else {
            throw InputError(std::string("unexpected character '") + peek() +
                             "' in symmetry expression");
        }
    }

    Rational parse_number() {
        std::string digits;
        bool dot = false;
        while (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) {
            if (peek() == '.') {
                if (dot) break;
                dot = true;
            }
            digits += get();
        }
        if (digits.empty() || digits == ".")
            throw InputError("malformed number in symmetry expression");
        const std::size_t point = digits.find('.');
        if (point == std::string::npos) return Rational(std::stoll(digits));
        const std::string whole = digits.substr(0, point);
        const std::string frac = digits.substr(point + 1);
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        const std::int64_t num = (whole.empty() ? 0 : std::stoll(whole)) * den +
                                 (frac.empty() ? 0 : std::stoll(frac));
        return Rational(num, den);
    }

    static bool is_var(char c) {
        const char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return l == 'x' || l == 'y' || l == 'z';
    }
    static int var_index(char c) {
        return static_cast<char>(std::tolower(static_cast<unsigned char>(c))) - 'x';
    }

    bool at_end() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }
    char get() { return s_[pos_++]; }
    void skip_space() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

Rational rational_det3(const std::vector<Rational>& m) {
    auto at = [&](int r, int c) { return m[r * 3 + c]; };
    return at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
           at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
           at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0));
}

}  // namespace

Vec SymmetryOp::apply(const Vec& fractional) const {
    Vec out(dim, 0.0);
    for (int r = 0; r < dim; ++r) {
        double v = translation[r].to_double();
        for (int c = 0; c < dim; ++c) v += rotation[r * dim + c].to_double() * fractional[c];
        out[r] = wrap_unit(v);
    }
    return out;
}

SymmetryOp parse_symmetry_op(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    if (parts.size() != 3)
        throw InputError("symmetry operator '" + s + "' must have three components");

    SymmetryOp op;
    op.dim = 3;
    op.rotation.assign(9, Rational(0));
    op.translation.assign(3, Rational(0));
    for (int r = 0; r < 3; ++r) {
        std::vector<Rational> row(3, Rational(0));
        Rational t(0);
        try {
            ExprParser(parts[r]).parse_component(row, t);
        } catch (const InputError& e) {
            throw InputError("symmetry operator '" + s + "': " + e.what());
        }
        for (int c = 0; c < 3; ++c) op.rotation[r * 3 + c] = row[c];
        op.translation[r] = t.wrapped_unit();
    }
    const Rational det = rational_det3(op.rotation);
    if (det != Rational(1) && det != Rational(-1))
        throw InputError("symmetry operator '" + s + "' has determinant " + det.str() +
                         ", expected +1 or -1");
    return op;
}

// --- high-level CIF ingestion ---

namespace {

double parse_cif_number(const CifValue& v, const std::string& context) {
    std::string t = v.text;
    const std::size_t paren = t.find('(');
    if (paren != std::string::npos) t.resize(paren);  // strip standard uncertainty
    try {
        std::size_t used = 0;
        const double x = std::stod(t, &used);
        if (used != t.size()) throw std::invalid_argument(t);
        return x;
    } catch (const std::exception&) {
        throw InputError(context + ": cannot parse number '" + v.text + "' (line " +
                         std::to_string(v.line) + ")");
    }
}

bool is_missing(const std::string& v) { return v == "." || v == "?" || v.empty(); }

int find_tag(const CifLoop& loop, const std::string& tag) {
    for (std::size_t i = 0; i < loop.tags.size(); ++i)
        if (loop.tags[i] == tag) return static_cast<int>(i);
    return -1;
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

// Minimum-image Cartesian distance over the neighbor cells.
double periodic_distance(const Lattice& lattice, const Vec& fa, const Vec& fb) {
    const int n = lattice.dim();
    double best = 1e300;
    std::vector<int> c(n, -1);
    while (true) {
        Vec d(n);
        for (int i = 0; i < n; ++i) d[i] = fa[i] - fb[i] + c[i];
        best = std::min(best, norm(lattice.to_cartesian(d)));
        int i = 0;
        while (i < n && c[i] == 1) c[i++] = -1;
        if (i == n) break;
        ++c[i];
    }
    return best;
}

}  // namespace

ParseResult parse_cif(const std::string& text, const std::string& source) {
    const CifDocument doc = parse_cif_document(text, source);
    ParseResult result;

    for (const auto& block : doc.blocks) {
        const std::string where = source + " block '" + block.name + "'";
        auto cell_value = [&](const char* tag) -> const CifValue& {
            const auto it = block.items.find(tag);
            if (it == block.items.end() || is_missing(it->second.text))
                throw InputError(where + ": missing cell tag " + tag);
            return it->second;
        };
        const double a = parse_cif_number(cell_value("_cell_length_a"), where);
        const double b = parse_cif_number(cell_value("_cell_length_b"), where);
        const double c = parse_cif_number(cell_value("_cell_length_c"), where);
        const double alpha = parse_cif_number(cell_value("_cell_angle_alpha"), where);
        const double beta = parse_cif_number(cell_value("_cell_angle_beta"), where);
        const double gamma = parse_cif_number(cell_value("_cell_angle_gamma"), where);
        const Lattice lattice = cell_from_parameters(a, b, c, alpha, beta, gamma);

        // atom sites
        const CifLoop* sites = nullptr;
        for (const auto& loop : block.loops)
            if (find_tag(loop, "_atom_site_fract_x") >= 0) {
                sites = &loop;
                break;
            }
        if (!sites || sites->rows.empty())
            throw InputError(where + ": no atom sites");
        const int ix = find_tag(*sites, "_atom_site_fract_x");
        const int iy = find_tag(*sites, "_atom_site_fract_y");
        const int iz = find_tag(*sites, "_atom_site_fract_z");
        if (iy < 0 || iz < 0) throw InputError(where + ": incomplete fractional coordinates");
        const int ilabel = find_tag(*sites, "_atom_site_type_symbol") >= 0
                               ? find_tag(*sites, "_atom_site_type_symbol")
                               : find_tag(*sites, "_atom_site_label");
        const int iocc = find_tag(*sites, "_atom_site_occupancy");
        const int idis = find_tag(*sites, "_atom_site_disorder_group");

        // only full geometric data: skip disordered / partially occupied blocks
        bool skip = false;
        for (const auto& row : sites->rows) {
            if (iocc >= 0 && !is_missing(row[iocc].text) &&
                parse_cif_number(row[iocc], where) < 0.999)
                skip = true;
            if (idis >= 0 && !is_missing(row[idis].text)) skip = true;
        }
        if (skip) {
            result.warnings.push_back(
                {block.name, "skipped: partial occupancy or disorder tags present"});
            continue;
        }

        // symmetry operators
        std::vector<SymmetryOp> ops;
        auto parse_op_value = [&](const CifValue& v) {
            try {
                ops.push_back(parse_symmetry_op(v.text));
            } catch (const InputError& e) {
                throw InputError(where + " (line " + std::to_string(v.line) + "): " + e.what());
            }
        };
        for (const char* tag : {"_symmetry_equiv_pos_as_xyz", "_space_group_symop_operation_xyz"}) {
            for (const auto& loop : block.loops) {
                const int col = find_tag(loop, tag);
                if (col < 0) continue;
                for (const auto& row : loop.rows) parse_op_value(row[col]);
            }
            const auto item = block.items.find(tag);
            if (item != block.items.end()) parse_op_value(item->second);
            if (!ops.empty()) break;
        }
        if (ops.empty()) ops.push_back(parse_symmetry_op("x,y,z"));

        // expand
        std::vector<Vec> expanded;
        std::vector<std::string> labels;
        for (const auto& row : sites->rows) {
            Vec site{parse_cif_number(row[ix], where), parse_cif_number(row[iy], where),
                     parse_cif_number(row[iz], where)};
            const std::string label = ilabel >= 0 ? row[ilabel].text : "";
            for (const auto& op : ops) {
                expanded.push_back(op.apply(site));
                labels.push_back(label);
            }
        }

        // merge near-duplicates (tolerance in Cartesian angstroms)
        const int total = static_cast<int>(expanded.size());
        UnionFind uf(total);
        for (int i = 0; i < total; ++i)
            for (int j = i + 1; j < total; ++j)
                if (periodic_distance(lattice, expanded[i], expanded[j]) <= kSiteMergeTolerance)
                    uf.unite(i, j);
        std::map<int, std::vector<int>> groups;
        for (int i = 0; i < total; ++i) groups[uf.find(i)].push_back(i);

        std::vector<std::pair<Vec, std::string>> merged;
        for (const auto& [root, members] : groups) {
            Vec rep = expanded[members[0]];
            std::string label = labels[members[0]];
            bool label_clash = false;
            for (int m : members) {
                if (expanded[m] < rep) rep = expanded[m];
                if (labels[m] != labels[members[0]]) label_clash = true;
                if (labels[m] < label) label = labels[m];
            }
            if (label_clash)
                result.warnings.push_back(
                    {block.name, "merged sites carry different element labels near (" +
                                     std::to_string(rep[0]) + ", " + std::to_string(rep[1]) + ", " +
                                     std::to_string(rep[2]) + ")"});
            merged.emplace_back(std::move(rep), std::move(label));
        }
        std::sort(merged.begin(), merged.end());

        std::vector<Vec> points;
        std::vector<std::string> site_labels;
        for (auto& [p, l] : merged) {
            points.push_back(std::move(p));
            site_labels.push_back(std::move(l));
        }
        result.sets.emplace_back(lattice, Motif(3, points), block.name, std::move(site_labels));
    }
    return result;
}

// --- JSON structure format ---

Structure structure_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("invalid structure JSON: ") + e.what());
    }
    try {
        const std::string label = j.value("label", std::string{});
        if (j.contains("points")) {
            std::vector<Vec> points = j.at("points").get<std::vector<Vec>>();
            return FiniteSet(std::move(points), label);
        }
        const auto cell = j.at("cell").get<std::vector<Vec>>();
        const int n = static_cast<int>(cell.size());
        std::vector<double> basis(static_cast<std::size_t>(n) * n);
        for (int v = 0; v < n; ++v) {
            if (static_cast<int>(cell[v].size()) != n)
                throw InputError("cell must be a square matrix of basis vectors");
            for (int i = 0; i < n; ++i) basis[i + static_cast<std::size_t>(n) * v] = cell[v][i];
        }
        Lattice lattice(n, std::move(basis));
        std::vector<Vec> motif = j.at("motif_frac").get<std::vector<Vec>>();
        std::vector<std::string> site_labels;
        if (j.contains("site_labels"))
            site_labels = j.at("site_labels").get<std::vector<std::string>>();
        return PeriodicSet(std::move(lattice), Motif(n, std::move(motif)), label,
                           std::move(site_labels));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("invalid structure JSON: ") + e.what());
    }
}

std::string structure_to_json(const Structure& s) {
    nlohmann::json j;
    if (std::holds_alternative<FiniteSet>(s)) {
        const auto& fs = std::get<FiniteSet>(s);
        j["points"] = fs.points();
        if (!fs.label().empty()) j["label"] = fs.label();
    } else {
        const auto& ps = std::get<PeriodicSet>(s);
        const int n = ps.dim();
        std::vector<Vec> cell(n, Vec(n));
        for (int v = 0; v < n; ++v)
            for (int i = 0; i < n; ++i) cell[v][i] = ps.lattice().basis(i, v);
        j["cell"] = cell;
        j["motif_frac"] = ps.motif().points();
        if (!ps.label().empty()) j["label"] = ps.label();
        if (!ps.site_labels().empty()) j["site_labels"] = ps.site_labels();
    }
    return j.dump(2) + "\n";
}

std::vector<Structure> load_structures(const std::string& path,
                                       std::vector<ParseWarning>* warnings) {
    const std::string text = read_text_file(path);
    const auto dot = path.rfind('.');
    const std::string ext = lower(dot == std::string::npos ? "" : path.substr(dot + 1));
    if (ext == "json") return {structure_from_json(text)};
    if (ext == "cif") {
        ParseResult res = parse_cif(text, path);
        if (warnings)
            warnings->insert(warnings->end(), res.warnings.begin(), res.warnings.end());
        std::vector<Structure> out;
        for (auto& s : res.sets) out.emplace_back(std::move(s));
        return out;
    }
    throw InputError(path + ": unsupported structure format (expected .cif or .json)");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + path);
    out << content;
}

}  // namespace pdd
