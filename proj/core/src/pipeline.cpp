#include "fluidfrag/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "fluidfrag/fcidump.hpp"

namespace fluidfrag {

const char* to_string(Method m) { return m == Method::lr ? "lr" : "gfro"; }

void PipelineConfig::validate() const {
    if (input.empty()) throw ValidationError("pipeline config: missing input path");
    if (lr_threshold <= 0.0 || gfro_threshold <= 0.0 || iterate_tol <= 0.0)
        throw ValidationError("pipeline config: thresholds must be positive");
    if (iterate_max < 1) throw ValidationError("pipeline config: iterate_max must be >= 1");
}

namespace {

std::string stem_of(const std::string& path) {
    const auto slash = path.find_last_of("/\\");
    std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
    const auto dot = name.find_last_of('.');
    if (dot != std::string::npos && dot > 0) name = name.substr(0, dot);
    return name;
}

Variant parse_variant(const std::string& v) {
    if (v == "full") return Variant::full;
    if (v == "r1") return Variant::r1;
    if (v == "r2") return Variant::r2;
    throw ParseError("config: unknown variant '" + v + "'");
}

ProxyKind parse_proxy(const std::string& v) {
    if (v == "hf") return ProxyKind::HF;
    if (v == "cisd") return ProxyKind::CISD;
    if (v == "fci") return ProxyKind::FCI;
    throw ParseError("config: unknown proxy '" + v + "'");
}

}  // namespace

PipelineConfig parse_config(std::istream& in) {
    PipelineConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(line_no) + ": expected key=value");
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t\r"));
            s.erase(s.find_last_not_of(" \t\r") + 1);
            return s;
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "input") cfg.input = value;
            else if (key == "method") {
                if (value == "lr") cfg.method = Method::lr;
                else if (value == "gfro") cfg.method = Method::gfro;
                else throw ParseError("config: unknown method '" + value + "'");
            } else if (key == "variant") {
                if (value == "none") cfg.variant.reset();
                else cfg.variant = parse_variant(value);
            } else if (key == "proxy") cfg.proxy = parse_proxy(value);
            else if (key == "lr_threshold") cfg.lr_threshold = std::stod(value);
            else if (key == "gfro_threshold") cfg.gfro_threshold = std::stod(value);
            else if (key == "iterate_tol") cfg.iterate_tol = std::stod(value);
            else if (key == "iterate_max") cfg.iterate_max = std::stoi(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "tag") cfg.tag = value;
            else if (key == "out_frags") cfg.out_frags = value;
            else if (key == "out_solution") cfg.out_solution = value;
            else if (key == "out_report") cfg.out_report = value;
            else throw ParseError("config line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw ParseError("config line " + std::to_string(line_no) +
                             ": malformed value for '" + key + "'");
        }
    }
    return cfg;
}

PipelineConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    return parse_config(in);
}

PipelineResult run_pipeline(const PipelineConfig& config) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();
    auto stage = [](const char* name, auto&& fn) {
        try {
            return fn();
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw Error(std::string(name) + ": " + e.what());
        }
    };

    SpatialTensors tensors;
    try {
        tensors = to_chemist(parse_fcidump_file(config.input));
    } catch (const Error& e) {
        throw Error("parse stage (" + config.input + "): " + e.what());
    }

    FragmentSet set;
    try {
        set = config.method == Method::lr
                  ? lr_decompose(tensors, config.lr_threshold)
                  : gfro_decompose(tensors, config.gfro_threshold,
                                   GfroConfig{.seed = config.seed});
    } catch (const Error& e) {
        throw Error(std::string("decompose stage: ") + e.what());
    }
    if (!config.out_frags.empty()) write_fragments_file(config.out_frags, set);

    auto basis = std::make_shared<SectorBasis>(
        SectorBasis::full_sector(tensors.n_spin_orbitals(), tensors.n_electrons));
    const TwoBodyOperator hamiltonian = TwoBodyOperator::from_spatial(tensors);

    FragmentSet measured = set;
    std::optional<RepartitionSolution> solution;
    if (config.variant) {
        try {
            const ProxyState proxy = ground_state(hamiltonian, basis, config.proxy);
            solution = iterate(set, proxy, *config.variant, config.iterate_tol,
                               config.iterate_max);
            measured = apply_repartition(set, solution->c, *config.variant);
        } catch (const Error& e) {
            throw Error(std::string("optimize stage: ") + e.what());
        }
        if (!config.out_solution.empty()) write_solution_file(config.out_solution, *solution);
    }

    PipelineResult result;
    try {
        const ProxyState psi = ground_state(hamiltonian, basis, ProxyKind::FCI);
        Eigen::VectorXd m;
        std::string note;
        if (solution) {
            m = solution->m;
            note = "allocation from proxy-optimized solution; all electrons correlated";
        } else {
            Eigen::VectorXd var(set.n_fragments() + 1);
            var(0) = fragment_variance(set.h0, psi);
            for (int a = 0; a < set.n_fragments(); ++a)
                var(a + 1) = fragment_variance(set.two_body[a], psi);
            m = allocate(var);
            note = "optimal allocation from exact variances; all electrons correlated";
        }
        result.report = stage("report stage", [&] { return exact_report(measured, m, psi); });
        result.report.molecule = config.tag.empty() ? stem_of(config.input) : config.tag;
        result.report.variant = config.variant;
        result.report.notes = note;
        if (solution) {
            result.report.predicted_eps2M = solution->predicted_eps2M;
            result.report.proxy_gap = solution->predicted_eps2M - result.report.eps2M;
        }
    } catch (const Error& e) {
        throw Error(std::string("report stage: ") + e.what());
    }
    if (!config.out_report.empty()) {
        std::ofstream out(config.out_report);
        if (!out) throw Error("cannot open report output: " + config.out_report);
        write_report_tsv(out, result.report);
    }

    result.row.tag = result.report.molecule;
    result.row.n_spin_orbitals = tensors.n_spin_orbitals();
    result.row.method = config.method;
    result.row.variant = config.variant;
    result.row.eps2M = result.report.eps2M;
    result.row.n_f = set.n_fragments();
    result.row.n_c = solution ? static_cast<int>(solution->c.size()) : 0;
    result.row.iterations = solution ? solution->iterations : 0;
    result.row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

std::string emit_table(std::vector<BenchmarkRow> rows) {
    if (rows.empty()) throw ValidationError("emit_table: need at least one row");
    std::sort(rows.begin(), rows.end(), [](const BenchmarkRow& a, const BenchmarkRow& b) {
        if (a.n_spin_orbitals != b.n_spin_orbitals)
            return a.n_spin_orbitals < b.n_spin_orbitals;
        return a.tag < b.tag;
    });

    const std::vector<std::pair<std::string, std::string>> columns = {
        {"lr:", "LR"},           {"gfro:", "GFRO"},
        {"lr:full", "F3-LR-Full"},   {"lr:r1", "F3-LR-R1"},   {"lr:r2", "F3-LR-R2"},
        {"gfro:full", "F3-GFRO-Full"}, {"gfro:r1", "F3-GFRO-R1"}, {"gfro:r2", "F3-GFRO-R2"},
    };

    struct Line {
        std::string tag;
        int n;
        std::map<std::string, double> cells;
    };
    std::vector<Line> lines;
    for (const auto& row : rows) {
        const std::string key =
            std::string(to_string(row.method)) + ":" +
            (row.variant ? to_string(*row.variant) : "");
        auto it = std::find_if(lines.begin(), lines.end(),
                               [&](const Line& l) { return l.tag == row.tag; });
        if (it == lines.end()) {
            lines.push_back({row.tag, row.n_spin_orbitals, {}});
            it = std::prev(lines.end());
        }
        it->cells[key] = row.eps2M;
    }

    std::ostringstream out;
    out << "Sys\tN";
    for (const auto& [key, title] : columns) out << "\t" << title;
    out << "\n";
    char buf[32];
    for (const auto& line : lines) {
        out << line.tag << "\t" << line.n;
        for (const auto& [key, title] : columns) {
            auto it = line.cells.find(key);
            if (it == line.cells.end()) {
                out << "\t-";
            } else {
                std::snprintf(buf, sizeof(buf), "%.5e", it->second);
                out << "\t" << buf;
            }
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace fluidfrag
