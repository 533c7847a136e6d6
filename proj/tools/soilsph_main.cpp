// soilsph command-line driver: run scenarios, validate configs, and compare
// probe series against the analytic column solutions.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "soilsph/runner.hpp"

namespace {

int cmd_run(const std::string& scenario_path, const soilsph::RunOverrides& overrides) {
    using namespace soilsph;
    ScenarioConfig cfg;
    try {
        cfg = apply_overrides(load_scenario(scenario_path), overrides);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }

    const ValidationReport report = validate_scenario(cfg);
    for (const std::string& w : report.warnings) std::cerr << "warning: " << w << "\n";
    if (!report.ok()) {
        for (const std::string& e : report.errors) std::cerr << "error: " << e << "\n";
        return kExitParse;
    }

    RunOutcome out;
    try {
        out = run_scenario(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }

    std::cout << "scenario: " << (cfg.name.empty() ? scenario_path : cfg.name) << "\n"
              << "particles: " << out.soil_count << " soil, " << out.particle_count
              << " total\n"
              << "steps: " << out.steps << "  t_final: " << out.t_final << " s"
              << (out.early_exit ? " (early exit)" : "") << "\n"
              << "dt_initial: " << out.dt_initial << " s\n"
              << "expulsion_metric: " << out.expulsion_metric << " m\n"
              << "outputs: " << cfg.output.directory << "\n";
    if (out.diverged) std::cerr << "error: " << out.reason << "\n";
    return out.exit_code;
}

int cmd_validate(const std::string& scenario_path) {
    using namespace soilsph;
    ScenarioConfig cfg;
    try {
        cfg = load_scenario(scenario_path);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }
    const ValidationReport report = validate_scenario(cfg);
    for (const std::string& w : report.warnings) std::cout << "warning: " << w << "\n";
    for (const std::string& e : report.errors) std::cout << "error: " << e << "\n";
    if (report.ok()) {
        std::cout << "ok\n";
        return kExitOk;
    }
    return kExitParse;
}

int cmd_probe_report(const std::string& probe_path, const std::string& scenario_path,
                     const std::string& oracle, const std::string& out_path) {
    using namespace soilsph;
    try {
        const ProbeSeries series = read_probe_file(probe_path);
        std::optional<ScenarioConfig> cfg;
        if (!scenario_path.empty()) cfg = load_scenario(scenario_path);
        const bool analytic = oracle == "analytic";
        if (analytic && !cfg) {
            std::cerr << "error: --oracle analytic requires --scenario\n";
            return kExitParse;
        }
        const auto rows = probe_report(series, cfg ? &*cfg : nullptr, analytic);
        if (out_path.empty()) {
            write_probe_report(std::cout, rows);
        } else {
            std::ofstream os(out_path);
            if (!os) throw std::runtime_error("cannot write '" + out_path + "'");
            write_probe_report(os, rows);
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }
}

}  // namespace

int main(int argc, char** argv) {
    using namespace soilsph;
    CLI::App app{"soilsph - 2D SPH solver for dry and submerged elastic soil"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run a scenario file");
    std::string scenario_path;
    run->add_option("scenario", scenario_path, "scenario JSON file")->required();
    RunOverrides ov;
    std::string formulation, stress_form, out_dir;
    double xi = -1.0, duration = -1.0;
    bool no_correction = false, deterministic = false, vtk = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
    run->add_option("--formulation", formulation,
                    "pore-pressure gradient form: corrected | conventional")
        ->check(CLI::IsMember({"corrected", "conventional"}));
    run->add_option("--stress-form", stress_form, "stress divergence form: rho2 | rhoab")
        ->check(CLI::IsMember({"rho2", "rhoab"}));
    run->add_flag("--no-kernel-correction", no_correction,
                  "disable the kernel gradient correction");
    run->add_option("--xi", xi, "damping coefficient for the loading phase");
    run->add_option("--duration", duration, "loading phase duration [s]");
    run->add_flag("--deterministic", deterministic, "record deterministic mode in outputs");
    run->add_option("--seed", seed, "seed for randomized perturbations")
        ->each([&seed_set](const std::string&) { seed_set = true; });
    run->add_option("--out", out_dir, "output directory");
    run->add_flag("--vtk", vtk, "also write legacy VTK snapshots");

    // validate
    auto* validate = app.add_subcommand("validate", "Check a scenario file without running");
    std::string validate_path;
    validate->add_option("scenario", validate_path, "scenario JSON file")->required();

    // probe-report
    auto* report = app.add_subcommand("probe-report",
                                      "Compare a probe series against analytic targets");
    std::string probe_path, report_scenario, oracle = "analytic", report_out;
    report->add_option("--probe", probe_path, "probe TSV file")->required();
    report->add_option("--scenario", report_scenario, "scenario file for analytic targets");
    report->add_option("--oracle", oracle, "analytic | none")
        ->check(CLI::IsMember({"analytic", "none"}));
    report->add_option("--out", report_out, "write the table here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        if (formulation == "corrected") ov.pwater_form = PoreWaterForm::corrected_difference;
        if (formulation == "conventional") ov.pwater_form = PoreWaterForm::conventional_sum;
        if (stress_form == "rho2") ov.stress_form = StressForm::rho2;
        if (stress_form == "rhoab") ov.stress_form = StressForm::rhoab;
        if (no_correction) ov.kernel_correction = false;
        if (xi >= 0.0) ov.xi = xi;
        if (duration >= 0.0) ov.duration = duration;
        if (deterministic) ov.deterministic = true;
        if (seed_set) ov.seed = seed;
        if (!out_dir.empty()) ov.out_dir = out_dir;
        if (vtk) ov.vtk = true;
        return cmd_run(scenario_path, ov);
    }
    if (validate->parsed()) return cmd_validate(validate_path);
    if (report->parsed()) return cmd_probe_report(probe_path, report_scenario, oracle, report_out);
    return kExitOk;
}
