// Command-line front end: fragment decomposition, measurement-cost
// optimization, reporting and shot-noise simulation for fermionic
// Hamiltonians ingested from FCIDUMP files.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include "fluidfrag/fcidump.hpp"
#include "fluidfrag/fluid.hpp"
#include "fluidfrag/metrics.hpp"
#include "fluidfrag/pipeline.hpp"

using namespace fluidfrag;

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.5e", v);
    return buf;
}

Variant variant_of(const std::string& s) {
    if (s == "full") return Variant::full;
    if (s == "r1") return Variant::r1;
    if (s == "r2") return Variant::r2;
    throw CLI::ValidationError("--variant", "expected full|r1|r2");
}

ProxyKind proxy_of(const std::string& s) {
    if (s == "hf") return ProxyKind::HF;
    if (s == "cisd") return ProxyKind::CISD;
    if (s == "fci") return ProxyKind::FCI;
    throw CLI::ValidationError("--proxy", "expected hf|cisd|fci");
}

struct LoadedProblem {
    SpatialTensors tensors;
    std::shared_ptr<SectorBasis> basis;
    TwoBodyOperator hamiltonian;
};

LoadedProblem load_problem(const std::string& path) {
    LoadedProblem p;
    p.tensors = to_chemist(parse_fcidump_file(path));
    p.basis = std::make_shared<SectorBasis>(SectorBasis::full_sector(
        p.tensors.n_spin_orbitals(), p.tensors.n_electrons));
    p.hamiltonian = TwoBodyOperator::from_spatial(p.tensors);
    return p;
}

int cmd_check(const std::string& input) {
    const RawIntegrals raw = parse_fcidump_file(input);
    const SpatialTensors t = to_chemist(raw);
    Eigen::Map<const Eigen::VectorXd> g_flat(t.g_tilde.data().data(),
                                             static_cast<Eigen::Index>(t.g_tilde.data().size()));
    std::cout << "n_orbitals\t" << raw.n_orbitals << "\n"
              << "n_electrons\t" << raw.n_electrons << "\n"
              << "e_nuc\t" << num(raw.e_nuc) << "\n"
              << "core_h_fro_norm\t" << num(raw.core_h.norm()) << "\n"
              << "h_tilde_fro_norm\t" << num(t.h_tilde.norm()) << "\n"
              << "g_tilde_fro_norm\t" << num(g_flat.norm()) << "\n"
              << "g_tilde_l1_norm\t" << num(t.g_tilde.l1_norm()) << "\n"
              << "duplicate_residual\t" << num(raw.duplicate_residual) << "\n"
              << "core_h_symmetry_residual\t" << num(symmetry_residual(raw.core_h)) << "\n"
              << "eri_symmetry_residual\t" << num(raw.eri.symmetry_residual()) << "\n";
    return 0;
}

int cmd_energy(const std::string& input) {
    const LoadedProblem p = load_problem(input);
    std::cout << "kind\telectronic\ttotal\n";
    for (ProxyKind kind : {ProxyKind::HF, ProxyKind::CISD, ProxyKind::FCI}) {
        const ProxyState state = ground_state(p.hamiltonian, p.basis, kind);
        std::cout << to_string(kind) << "\t" << num(state.energy) << "\t"
                  << num(state.energy + p.tensors.e_nuc) << "\n";
    }
    return 0;
}

int cmd_decompose(const std::string& input, const std::string& output,
                  const std::string& method, double threshold, uint64_t seed) {
    const SpatialTensors t = to_chemist(parse_fcidump_file(input));
    FragmentSet set;
    if (method == "lr") {
        set = lr_decompose(t, threshold > 0 ? threshold : 1e-8);
    } else if (method == "gfro") {
        GfroConfig cfg;
        cfg.seed = seed;
        set = gfro_decompose(t, threshold > 0 ? threshold : 1e-5, cfg);
    } else {
        throw CLI::ValidationError("--method", "expected lr|gfro");
    }
    write_fragments_file(output, set);
    std::cout << "fragments\t" << set.n_fragments() << "\n"
              << "residual_l1\t" << num(set.residual_l1) << "\n"
              << "written\t" << output << "\n";
    return 0;
}

int cmd_optimize(const std::string& frags_path, const std::string& input,
                 const std::string& output, const std::string& variant,
                 const std::string& proxy, double tol) {
    const FragmentSet set = read_fragments_file(frags_path);
    const LoadedProblem p = load_problem(input);
    const ProxyState proxy_state = ground_state(p.hamiltonian, p.basis, proxy_of(proxy));
    const RepartitionSolution sol =
        iterate(set, proxy_state, variant_of(variant), tol);
    write_solution_file(output, sol);
    std::cout << "variant\t" << to_string(sol.variant) << "\n"
              << "n_c\t" << sol.c.size() << "\n"
              << "iterations\t" << sol.iterations << "\n"
              << "converged\t" << (sol.converged ? "yes" : "no") << "\n"
              << "predicted_eps2M\t" << num(sol.predicted_eps2M) << "\n"
              << "written\t" << output << "\n";
    return 0;
}

int cmd_report(const std::string& frags_path, const std::string& input,
               const std::string& solution_path, const std::string& out_path) {
    FragmentSet set = read_fragments_file(frags_path);
    const LoadedProblem p = load_problem(input);
    const ProxyState psi = ground_state(p.hamiltonian, p.basis, ProxyKind::FCI);

    Eigen::VectorXd m;
    MeasurementReport report;
    if (!solution_path.empty()) {
        const RepartitionSolution sol = read_solution_file(solution_path);
        set = apply_repartition(set, sol.c, sol.variant);
        report = exact_report(set, sol.m, psi);
        report.variant = sol.variant;
        report.predicted_eps2M = sol.predicted_eps2M;
        report.proxy_gap = sol.predicted_eps2M - report.eps2M;
        report.notes = "allocation from proxy-optimized solution; all electrons correlated";
    } else {
        Eigen::VectorXd var(set.n_fragments() + 1);
        var(0) = fragment_variance(set.h0, psi);
        for (int a = 0; a < set.n_fragments(); ++a)
            var(a + 1) = fragment_variance(set.two_body[a], psi);
        report = exact_report(set, allocate(var), psi);
        report.notes = "optimal allocation from exact variances; all electrons correlated";
    }
    if (out_path.empty()) {
        write_report_tsv(std::cout, report);
    } else {
        std::ofstream out(out_path);
        if (!out) throw Error("cannot open report output: " + out_path);
        write_report_tsv(out, report);
        std::cout << "written\t" << out_path << "\n";
    }
    return 0;
}

int cmd_simulate(const std::string& frags_path, const std::string& input,
                 const std::string& solution_path, long shots, uint64_t seed) {
    FragmentSet set = read_fragments_file(frags_path);
    const LoadedProblem p = load_problem(input);
    const ProxyState psi = ground_state(p.hamiltonian, p.basis, ProxyKind::FCI);

    Eigen::VectorXd m;
    if (!solution_path.empty()) {
        const RepartitionSolution sol = read_solution_file(solution_path);
        set = apply_repartition(set, sol.c, sol.variant);
        m = sol.m;
    } else {
        Eigen::VectorXd var(set.n_fragments() + 1);
        var(0) = fragment_variance(set.h0, psi);
        for (int a = 0; a < set.n_fragments(); ++a)
            var(a + 1) = fragment_variance(set.two_body[a], psi);
        m = allocate(var);
    }
    const ShotRun run = simulate_shots(set, m, shots, psi, seed);
    std::cout << "seed\t" << run.seed << "\n"
              << "total_shots\t" << run.total_shots << "\n"
              << "estimate\t" << num(run.estimate) << "\n"
              << "reference\t" << num(run.reference) << "\n"
              << "error\t" << num(run.estimate - run.reference) << "\n";
    for (const auto& w : run.warnings) std::cout << "warning\t" << w << "\n";
    return 0;
}

int cmd_bench(const std::vector<std::string>& config_paths, const std::string& fixtures_dir,
              const std::string& molecules, bool skip_gfro, const std::string& out_path) {
    std::vector<BenchmarkRow> rows;
    if (!config_paths.empty()) {
        for (const auto& path : config_paths) {
            PipelineConfig cfg = parse_config_file(path);
            std::cerr << "running config " << path << "\n";
            rows.push_back(run_pipeline(cfg).row);
        }
    } else {
        std::vector<std::string> tags;
        std::istringstream ms(molecules);
        for (std::string tag; std::getline(ms, tag, ',');)
            if (!tag.empty()) tags.push_back(tag);
        std::vector<Method> methods{Method::lr};
        if (!skip_gfro) methods.push_back(Method::gfro);
        for (const auto& tag : tags) {
            for (Method method : methods) {
                for (int v = -1; v < 3; ++v) {
                    PipelineConfig cfg;
                    cfg.input = fixtures_dir + "/" + tag + ".fcidump";
                    cfg.tag = tag;
                    cfg.method = method;
                    if (v >= 0) cfg.variant = static_cast<Variant>(v);
                    std::cerr << "running " << tag << " " << to_string(method)
                              << (v >= 0 ? std::string(" ") + to_string(static_cast<Variant>(v))
                                         : std::string(" baseline"))
                              << "\n";
                    rows.push_back(run_pipeline(cfg).row);
                }
            }
        }
    }
    const std::string table = emit_table(rows);
    if (out_path.empty()) {
        std::cout << table;
    } else {
        std::ofstream out(out_path);
        if (!out) throw Error("cannot open table output: " + out_path);
        out << table;
        std::cout << "written\t" << out_path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"measurable-fragment decomposition and measurement-cost "
                 "optimization for molecular electronic Hamiltonians"};
    app.require_subcommand(1);

    std::string input, output, frags_path, solution_path, out_path;
    std::string method = "lr", variant = "full", proxy = "cisd";
    double threshold = 0.0, tol = 1e-6;
    uint64_t seed = 1;
    long shots = 1000000;

    auto* check = app.add_subcommand("check", "print tensor norms and symmetry residuals");
    check->add_option("input", input, "FCIDUMP file")->required();

    auto* energy = app.add_subcommand("energy", "print HF/CISD/FCI energies");
    energy->add_option("input", input, "FCIDUMP file")->required();

    auto* decompose = app.add_subcommand("decompose", "produce an initial fragment set");
    decompose->add_option("--method", method, "lr|gfro")->capture_default_str();
    decompose->add_option("--threshold", threshold,
                          "LR truncation / GFRO termination threshold");
    decompose->add_option("--seed", seed, "GFRO restart seed")->capture_default_str();
    decompose->add_option("input", input, "FCIDUMP file")->required();
    decompose->add_option("output", output, "fragment file to write")->required();

    auto* optimize = app.add_subcommand("optimize", "repartition one-electron weight");
    optimize->add_option("--variant", variant, "full|r1|r2")->capture_default_str();
    optimize->add_option("--proxy", proxy, "hf|cisd|fci")->capture_default_str();
    optimize->add_option("--tol", tol, "relative objective tolerance")->capture_default_str();
    optimize->add_option("frags", frags_path, "fragment file")->required();
    optimize->add_option("input", input, "FCIDUMP file")->required();
    optimize->add_option("output", output, "solution file to write")->required();

    auto* report = app.add_subcommand("report", "exact measurement-cost report (TSV)");
    report->add_option("--solution", solution_path, "apply this solution first");
    report->add_option("--out", out_path, "write TSV here instead of stdout");
    report->add_option("frags", frags_path, "fragment file")->required();
    report->add_option("input", input, "FCIDUMP file")->required();

    auto* simulate = app.add_subcommand("simulate", "seeded shot-noise simulation");
    simulate->add_option("--shots", shots, "total measurement budget")->capture_default_str();
    simulate->add_option("--seed", seed, "RNG seed")->capture_default_str();
    simulate->add_option("--solution", solution_path, "apply this solution first");
    simulate->add_option("frags", frags_path, "fragment file")->required();
    simulate->add_option("input", input, "FCIDUMP file")->required();

    auto* bench = app.add_subcommand("bench", "run the benchmark sweep and print a table");
    std::vector<std::string> config_paths;
    std::string fixtures_dir = "fixtures", molecules = "h3plus,h4";
    bool skip_gfro = false;
    bench->add_option("--config", config_paths, "explicit pipeline config file(s)");
    bench->add_option("--fixtures-dir", fixtures_dir, "directory with <tag>.fcidump files")
        ->capture_default_str();
    bench->add_option("--molecules", molecules, "comma-separated tags")->capture_default_str();
    bench->add_flag("--skip-gfro", skip_gfro, "LR columns only");
    bench->add_option("--out", out_path, "write the table here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(check)) return cmd_check(input);
        if (app.got_subcommand(energy)) return cmd_energy(input);
        if (app.got_subcommand(decompose))
            return cmd_decompose(input, output, method, threshold, seed);
        if (app.got_subcommand(optimize))
            return cmd_optimize(frags_path, input, output, variant, proxy, tol);
        if (app.got_subcommand(report))
            return cmd_report(frags_path, input, solution_path, out_path);
        if (app.got_subcommand(simulate))
            return cmd_simulate(frags_path, input, solution_path, shots, seed);
        if (app.got_subcommand(bench))
            return cmd_bench(config_paths, fixtures_dir, molecules, skip_gfro, out_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
