#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fluidfrag/metrics.hpp"

namespace fluidfrag {

enum class Method { lr, gfro };
const char* to_string(Method m);

struct PipelineConfig {
    std::string input;                 // FCIDUMP path
    Method method = Method::lr;
    std::optional<Variant> variant;    // nullopt: baseline, no repartition
    ProxyKind proxy = ProxyKind::CISD;
    double lr_threshold = 1e-8;
    double gfro_threshold = 1e-5;
    double iterate_tol = 1e-6;
    int iterate_max = 50;
    uint64_t seed = 1;
    std::string tag;                   // defaults to the input file stem
    std::string out_frags;
    std::string out_solution;
    std::string out_report;

    void validate() const;
};

/// Flat key=value text; '#' starts a comment. Keys mirror the fields:
/// input, method, variant, proxy, lr_threshold, gfro_threshold, iterate_tol,
/// iterate_max, seed, tag, out_frags, out_solution, out_report.
PipelineConfig parse_config(std::istream& in);
PipelineConfig parse_config_file(const std::string& path);

struct BenchmarkRow {
    std::string tag;
    int n_spin_orbitals = 0;
    Method method = Method::lr;
    std::optional<Variant> variant;
    double eps2M = 0.0;
    int n_c = 0;
    int n_f = 0;
    int iterations = 0;
    double wall_seconds = 0.0;
};

struct PipelineResult {
    BenchmarkRow row;
    MeasurementReport report;
};

/// parse -> decompose -> (optional) optimize -> exact report with the FCI
/// reference state. Stage failures rethrow with a stage-tagged message.
PipelineResult run_pipeline(const PipelineConfig& config);

/// Pivoted table of eps2M values, one line per molecule, method/variant
/// columns in benchmark order. Rows sorted by N then tag. Deterministic
/// fields only (wall time excluded).
std::string emit_table(std::vector<BenchmarkRow> rows);

}  // namespace fluidfrag
