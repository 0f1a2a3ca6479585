// Command-line front end: computes PDD/AMD invariants of crystal structures,
// compares them by exact earth mover's distance, scans datasets for
// near-duplicates, builds minimum spanning trees, checks reconstruction
// genericity and rebuilds motifs from invariants.

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdd/ingest.hpp"
#include "pdd/invariants.hpp"
#include "pdd/metrics.hpp"
#include "pdd/pipeline.hpp"
#include "pdd/reconstruct.hpp"

namespace fs = std::filesystem;

namespace {

struct LoadedStructure {
    pdd::Structure structure;
    std::string label;
    pdd::Provenance provenance;
};

std::string sanitize(const std::string& label) {
    std::string out;
    for (char c : label)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')
                   ? c
                   : '_';
    return out.empty() ? "unnamed" : out;
}

// Gathers structures from files and directories. Labels are file names, with
// the block name appended for multi-block files.
std::vector<LoadedStructure> gather(const std::vector<std::string>& inputs,
                                    std::vector<pdd::ParseWarning>* warnings) {
    std::vector<std::string> files;
    for (const auto& input : inputs) {
        if (fs::is_directory(input)) {
            std::vector<std::string> found;
            for (const auto& entry : fs::directory_iterator(input)) {
                if (!entry.is_regular_file()) continue;
                const auto ext = entry.path().extension().string();
                if (ext == ".cif" || ext == ".json") found.push_back(entry.path().string());
            }
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else {
            files.push_back(input);
        }
    }
    if (files.empty()) throw pdd::InputError("no input structures found");

    std::vector<LoadedStructure> out;
    for (const auto& file : files) {
        auto structures = pdd::load_structures(file, warnings);
        const std::string stem = fs::path(file).filename().string();
        const bool multi = structures.size() > 1;
        for (auto& s : structures) {
            LoadedStructure item{std::move(s), stem, {file, ""}};
            if (multi) {
                item.provenance.block = pdd::label_of(item.structure);
                item.label = stem + ":" + item.provenance.block;
            }
            out.push_back(std::move(item));
        }
    }
    return out;
}

LoadedStructure load_single(const std::string& path) {
    auto items = gather({path}, nullptr);
    if (items.size() != 1)
        throw pdd::InputError(path + ": expected exactly one structure, found " +
                              std::to_string(items.size()));
    return std::move(items[0]);
}

std::vector<pdd::PeriodicSet> periodic_only(const std::vector<LoadedStructure>& items,
                                            std::vector<pdd::Provenance>* provenance) {
    std::vector<pdd::PeriodicSet> sets;
    for (const auto& item : items) {
        if (!std::holds_alternative<pdd::PeriodicSet>(item.structure))
            throw pdd::InputError(item.provenance.source +
                                  ": finite point sets are not valid here (periodic "
                                  "structures required)");
        const auto& ps = std::get<pdd::PeriodicSet>(item.structure);
        sets.emplace_back(ps.lattice(), ps.motif(), item.label, ps.site_labels());
        if (provenance) provenance->push_back(item.provenance);
    }
    return sets;
}

void write_output(const std::string& path, const std::string& text) {
    pdd::write_text_file(path, text);
    std::cout << "wrote " << path << "\n";
}

void write_binary(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw pdd::InputError("cannot write file: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    std::cout << "wrote " << path << "\n";
}

pdd::PDDMatrix read_pdd_file(const std::string& path, int m) {
    const auto ext = fs::path(path).extension().string();
    if (ext == ".bin") {
        const std::string bytes = pdd::read_text_file(path);
        return pdd::pdd_from_binary(reinterpret_cast<const std::uint8_t*>(bytes.data()),
                                    bytes.size());
    }
    if (ext == ".json") return pdd::pdd_from_json(pdd::read_text_file(path));
    if (ext == ".csv") {
        // weights come back as doubles; recover the exact rational c/m
        std::vector<pdd::PddRow> rows;
        std::istringstream in(pdd::read_text_file(path));
        std::string line;
        int k = -1;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::vector<double> values;
            std::istringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ',')) values.push_back(std::stod(cell));
            if (values.size() < 2) throw pdd::InputError(path + ": malformed PDD CSV row");
            pdd::PddRow row;
            const double w = values[0];
            const auto c = static_cast<std::int64_t>(std::llround(w * m));
            if (c <= 0 || std::abs(w - static_cast<double>(c) / m) > 1e-9)
                throw pdd::InputError(path + ": row weight is not a multiple of 1/m");
            row.weight = pdd::Rational(c, m);
            row.distances.assign(values.begin() + 1, values.end());
            if (k < 0) k = static_cast<int>(row.distances.size());
            rows.push_back(std::move(row));
        }
        if (rows.empty()) throw pdd::InputError(path + ": empty PDD CSV");
        return pdd::PDDMatrix(k, std::move(rows));
    }
    throw pdd::InputError(path + ": unsupported PDD file format (.bin, .json or .csv)");
}

void emit_error(const char* type, const std::string& message) {
    nlohmann::json j;
    j["error"] = {{"type", type}, {"message", message}};
    std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"continuous isometry invariants of finite and periodic point sets"};
    app.require_subcommand(1);

    int k = 100;
    double collapse_tol = 0.0;
    std::string format = "csv";
    std::string output;
    int workers = 0;
    auto add_common = [&](CLI::App* cmd, bool with_format = true) {
        cmd->add_option("--k", k, "number of neighbors per point")
            ->default_val(100)
            ->check(CLI::PositiveNumber);
        cmd->add_option("--collapse-tol", collapse_tol,
                        "merge PDD rows equal within this tolerance (0 = exact)")
            ->default_val(0.0)
            ->check(CLI::NonNegativeNumber);
        cmd->add_option("--workers", workers,
                        "worker threads (0 = all cores)")
            ->default_val(0)
            ->envname("PDD_WORKERS");
        if (with_format)
            cmd->add_option("--format", format, "output format")
                ->default_val("csv")
                ->check(CLI::IsMember({"csv", "json", "binary"}));
    };

    std::vector<std::string> inputs;
    auto* cmd_pdd =
        app.add_subcommand("pdd", "compute PDD invariants and write one file per structure");
    cmd_pdd->add_option("inputs", inputs, "structure files or directories")->required();
    cmd_pdd->add_option("--output", output, "output directory")->default_val(".");
    add_common(cmd_pdd);

    auto* cmd_amd =
        app.add_subcommand("amd", "compute AMD vectors and write one file per structure");
    cmd_amd->add_option("inputs", inputs, "structure files or directories")->required();
    cmd_amd->add_option("--output", output, "output directory")->default_val(".");
    add_common(cmd_amd);

    std::string flow_file;
    auto* cmd_compare = app.add_subcommand("compare", "EMD and AMD gap between two structures");
    cmd_compare->add_option("inputs", inputs, "exactly two structure files")
        ->required()
        ->expected(2);
    cmd_compare->add_option("--flow", flow_file, "write the optimal transport plan as JSON");
    add_common(cmd_compare, false);

    double amd_threshold = 0.01, emd_threshold = 0.01;
    std::string store_dir;
    auto* cmd_scan = app.add_subcommand("scan", "two-stage near-duplicate scan over a dataset");
    cmd_scan->add_option("inputs", inputs, "structure files or directories")->required();
    cmd_scan->add_option("--amd-threshold", amd_threshold, "AMD prefilter threshold (angstrom)")
        ->default_val(0.01);
    cmd_scan->add_option("--emd-threshold", emd_threshold, "EMD duplicate threshold (angstrom)")
        ->default_val(0.01);
    cmd_scan->add_option("--output", output, "report file")->default_val("duplicates.csv");
    cmd_scan->add_option("--save-store", store_dir, "persist computed invariants to a directory");
    add_common(cmd_scan);

    int candidates = 0;
    auto* cmd_mst = app.add_subcommand("mst", "minimum spanning tree of a dataset under EMD");
    cmd_mst->add_option("inputs", inputs, "structure files or directories")->required();
    cmd_mst->add_option("--candidates", candidates,
                        "candidate neighbors per record by packing coefficient (0 = all)")
        ->default_val(0)
        ->check(CLI::NonNegativeNumber);
    cmd_mst->add_option("--output", output, "edge list file")->default_val("mst.csv");
    add_common(cmd_mst);

    std::string lattice_file, pdd_file, trace_file;
    int motif_size = 0;
    auto* cmd_rec = app.add_subcommand("reconstruct", "rebuild a structure from lattice + PDD");
    cmd_rec->add_option("--lattice", lattice_file, "JSON file with a \"cell\" matrix")->required();
    cmd_rec->add_option("--pdd", pdd_file, "PDD invariant file (.bin, .json or .csv)")->required();
    cmd_rec->add_option("--m", motif_size, "motif size of the original structure")
        ->required()
        ->check(CLI::PositiveNumber);
    cmd_rec->add_option("--output", output, "structure JSON output")
        ->default_val("reconstructed.json");
    cmd_rec->add_option("--trace", trace_file, "optional placement trace JSON");

    auto* cmd_gen = app.add_subcommand("check-generic", "reconstruction-genericity report");
    cmd_gen->add_option("inputs", inputs, "one structure file")->required()->expected(1);
    cmd_gen->add_option("--output", output, "report JSON file")->default_val("genericity.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        std::vector<pdd::ParseWarning> warnings;

        if (app.got_subcommand(cmd_pdd) || app.got_subcommand(cmd_amd)) {
            const bool want_pdd = app.got_subcommand(cmd_pdd);
            const auto items = gather(inputs, &warnings);
            fs::create_directories(output);
            for (const auto& item : items) {
                const auto matrix = pdd::pdd(item.structure, k, collapse_tol);
                const std::string base = (fs::path(output) / sanitize(item.label)).string() +
                                         (want_pdd ? ".pdd" : ".amd");
                if (want_pdd) {
                    if (format == "csv")
                        write_output(base + ".csv", pdd::pdd_to_csv(matrix));
                    else if (format == "json")
                        write_output(base + ".json", pdd::pdd_to_json(matrix));
                    else
                        write_binary(base + ".bin", pdd::pdd_to_binary(matrix));
                } else {
                    const auto vec = pdd::amd(matrix);
                    if (format == "csv")
                        write_output(base + ".csv", pdd::amd_to_csv(vec));
                    else if (format == "json")
                        write_output(base + ".json", pdd::amd_to_json(vec));
                    else
                        write_binary(base + ".bin", pdd::amd_to_binary(vec));
                }
            }
        } else if (app.got_subcommand(cmd_compare)) {
            const auto a = load_single(inputs[0]);
            const auto b = load_single(inputs[1]);
            const auto pa = pdd::pdd(a.structure, k, collapse_tol);
            const auto pb = pdd::pdd(b.structure, k, collapse_tol);
            const auto result = pdd::emd(pa, pb);
            const double gap = pdd::amd_distance(pdd::amd(pa), pdd::amd(pb));
            std::printf("EMD: %.6f\n", result.distance);
            std::printf("AMD gap: %.6f\n", gap);
            if (!flow_file.empty()) write_output(flow_file, pdd::flow_to_json(result.flow));
        } else if (app.got_subcommand(cmd_scan)) {
            const auto items = gather(inputs, &warnings);
            std::vector<pdd::Provenance> provenance;
            const auto sets = periodic_only(items, &provenance);
            const auto store = pdd::build_store(sets, k, collapse_tol, workers, &provenance);
            if (!store_dir.empty()) pdd::save_store(store, store_dir);
            const auto report = pdd::scan_duplicates(store, amd_threshold, emd_threshold, workers);
            write_output(output, format == "json" ? pdd::report_to_json(report)
                                                  : pdd::report_to_csv(report));
            std::cout << report.pairs.size() << " duplicate pair(s) at EMD <= " << emd_threshold
                      << "\n";
        } else if (app.got_subcommand(cmd_mst)) {
            const auto items = gather(inputs, &warnings);
            std::vector<pdd::Provenance> provenance;
            const auto sets = periodic_only(items, &provenance);
            const auto store = pdd::build_store(sets, k, collapse_tol, workers, &provenance);
            const int cand = candidates > 0 ? candidates : store.size() - 1;
            const auto mst = pdd::build_mst(store, cand, workers);
            write_output(output,
                         format == "json" ? pdd::mst_to_json(mst, store) : pdd::mst_to_csv(mst));
        } else if (app.got_subcommand(cmd_rec)) {
            nlohmann::json lat_json;
            try {
                lat_json = nlohmann::json::parse(pdd::read_text_file(lattice_file));
            } catch (const nlohmann::json::exception& e) {
                throw pdd::InputError(lattice_file + ": " + e.what());
            }
            const auto cell = lat_json.at("cell").get<std::vector<pdd::Vec>>();
            const pdd::Lattice lattice = pdd::Lattice::from_columns(cell);
            const auto matrix = read_pdd_file(pdd_file, motif_size);
            pdd::ReconstructionTrace trace;
            const auto rebuilt = pdd::reconstruct_motif(lattice, motif_size, matrix, &trace);
            write_output(output, pdd::structure_to_json(rebuilt));
            if (!trace_file.empty()) write_output(trace_file, pdd::trace_to_json(trace));
        } else if (app.got_subcommand(cmd_gen)) {
            const auto item = load_single(inputs[0]);
            if (!std::holds_alternative<pdd::PeriodicSet>(item.structure))
                throw pdd::InputError("genericity check requires a periodic structure");
            const auto report =
                pdd::check_distance_generic(std::get<pdd::PeriodicSet>(item.structure));
            write_output(output, pdd::genericity_report_to_json(report));
            std::cout << (report.is_generic ? "distance-generic\n" : "NOT distance-generic\n");
        }

        for (const auto& w : warnings)
            std::cerr << "warning: block '" << w.block << "': " << w.message << "\n";
    } catch (const pdd::InputError& e) {
        emit_error("input", e.what());
        return 1;
    } catch (const std::exception& e) {
        emit_error("numeric", e.what());
        return 2;
    }
    return 0;
}
