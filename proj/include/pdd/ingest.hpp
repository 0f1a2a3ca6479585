#pragma once

#include <map>
#include <string>
#include <vector>

#include "pdd/core.hpp"
#include "pdd/rational.hpp"

namespace pdd {

// --- low-level CIF document model ---

struct CifValue {
    std::string text;
    int line = 0;
};

struct CifLoop {
    std::vector<std::string> tags;
    std::vector<std::vector<CifValue>> rows;  // uniform arity = tags.size()
};

struct CifBlock {
    std::string name;
    std::map<std::string, CifValue> items;
    std::vector<CifLoop> loops;
};

struct CifDocument {
    std::vector<CifBlock> blocks;
    std::string source;  // file path or "<string>"
};

/// Tokenizes and structures CIF 1.1 text (tag/value pairs and loop_ tables).
CifDocument parse_cif_document(const std::string& text, const std::string& source = "<string>");

// --- symmetry operators ---

/// Affine map with exact rational entries, e.g. "-y,x-y,z+1/2".
struct SymmetryOp {
    int dim = 3;
    std::vector<Rational> rotation;     // row-major, rotation[r*dim + c]
    std::vector<Rational> translation;  // wrapped into [0,1)

    Vec apply(const Vec& fractional) const;  // result wrapped into [0,1)
};

SymmetryOp parse_symmetry_op(const std::string& s);

// --- high-level ingestion ---

struct ParseWarning {
    std::string block;
    std::string message;
};

struct ParseResult {
    std::vector<PeriodicSet> sets;
    std::vector<ParseWarning> warnings;
};

/// One PeriodicSet per data block: cell from the six cell tags, sites from the
/// atom_site loop, symmetry operators applied and duplicates merged (0.001 A).
/// Blocks with partial occupancy or disorder tags are skipped with a warning.
ParseResult parse_cif(const std::string& text, const std::string& source = "<string>");

/// Cartesian distance merge tolerance for symmetry-equivalent sites.
inline constexpr double kSiteMergeTolerance = 1e-3;

// --- JSON structure format ---

/// {"cell": [basis vectors], "motif_frac": [[...]], "label": ...} for periodic
/// sets, {"points": [[...]], "label": ...} for finite sets.
Structure structure_from_json(const std::string& json_text);
std::string structure_to_json(const Structure& s);

/// Loads .cif or .json by extension. CIF may yield several structures.
std::vector<Structure> load_structures(const std::string& path,
                                       std::vector<ParseWarning>* warnings = nullptr);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace pdd
