#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "soilsph/engine.hpp"
#include "soilsph/io.hpp"

namespace soilsph {

/// Command-line overrides applied on top of a parsed scenario.
struct RunOverrides {
    std::optional<PoreWaterForm> pwater_form;
    std::optional<StressForm> stress_form;
    std::optional<bool> kernel_correction;
    std::optional<double> xi;
    std::optional<double> duration;
    std::optional<bool> deterministic;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<bool> vtk;
};

inline ScenarioConfig apply_overrides(ScenarioConfig cfg, const RunOverrides& o) {
    if (o.pwater_form) cfg.numerics.pwater_form = *o.pwater_form;
    if (o.stress_form) cfg.numerics.stress_form = *o.stress_form;
    if (o.kernel_correction) cfg.numerics.kernel_correction = *o.kernel_correction;
    if (o.xi) cfg.loading.xi = *o.xi;
    if (o.duration) cfg.loading.duration = *o.duration;
    if (o.deterministic) cfg.numerics.deterministic = *o.deterministic;
    if (o.seed) cfg.numerics.seed = *o.seed;
    if (o.out_dir) cfg.output.directory = *o.out_dir;
    if (o.vtk) cfg.output.vtk = *o.vtk;
    return cfg;
}

struct RunOutcome {
    int exit_code = kExitOk;
    std::string reason = "completed";
    bool diverged = false;
    bool early_exit = false;
    double t_final = 0.0;
    std::size_t steps = 0;
    std::size_t soil_count = 0;
    std::size_t particle_count = 0;
    double dt_initial = 0.0;
    double expulsion_metric = 0.0;
    std::optional<Vec2> expelled_from;
    std::size_t degenerate_corrections_peak = 0;
    std::vector<ProbeSeries> probes;
    std::vector<std::string> snapshot_files;
    std::vector<std::string> probe_files;
    std::string manifest_file;
};

namespace detail_run {

inline void write_manifest(const std::filesystem::path& path, const ScenarioConfig& cfg,
                           const Simulation& sim, const RunOutcome& out,
                           double wall_seconds) {
    nlohmann::json dt_hist = nlohmann::json::array();
    for (const auto& [step, dt] : sim.dt_history()) dt_hist.push_back({step, dt});

    nlohmann::json j{
        {"format", "soilsph-manifest"},
        {"schema_version", kScenarioSchemaVersion},
        {"scenario", scenario_to_json(cfg)},
        {"run",
         {{"exit_code", out.exit_code},
          {"reason", out.reason},
          {"steps", out.steps},
          {"t_final", out.t_final},
          {"early_exit", out.early_exit},
          {"dt_initial", out.dt_initial},
          {"dt_history", dt_hist},
          {"soil_particles", out.soil_count},
          {"total_particles", out.particle_count},
          {"deterministic", cfg.numerics.deterministic},
          {"degenerate_corrections_peak", out.degenerate_corrections_peak},
          {"expulsion_metric_m", out.expulsion_metric},
          {"expelled_from", out.expelled_from
                                ? nlohmann::json{out.expelled_from->x, out.expelled_from->y}
                                : nlohmann::json()},
          {"wall_seconds", wall_seconds}}},
        {"outputs", {{"snapshots", out.snapshot_files}, {"probes", out.probe_files}}},
    };
    std::ofstream os(path);
    os << j.dump(2) << "\n";
}

}  // namespace detail_run

/**
 * Execute a scenario: build the initial state, run the loading phase (with
 * damping for gravity loading), drop the damping force, run the optional
 * analysis phase, and write probes, snapshots, and the run manifest.
 *
 * Divergence is captured, not crashed on: the last good snapshot is flushed
 * and the outcome carries exit code 3.
 */
inline RunOutcome run_scenario(const ScenarioConfig& cfg, bool write_outputs = true) {
    namespace fs = std::filesystem;
    const auto t_start = std::chrono::steady_clock::now();

    RunOutcome out;
    const fs::path dir = cfg.output.directory;
    if (write_outputs) fs::create_directories(dir);

    ScenarioState st = build_scenario(cfg);
    Simulation sim(std::move(st.soil), std::move(st.virtuals), st.walls, st.materials,
                   SimSettings::from(cfg));
    sim.set_surface_profile(st.surface);

    out.soil_count = sim.soil_count();
    out.particle_count = sim.particles().size();
    out.dt_initial = sim.dt();

    for (const Probe& p : cfg.probes) out.probes.push_back({p.label, p.position, {}});

    int snapshot_index = 0;
    const auto snapshot_path = [&](int n) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "snapshot_%06d", n);
        return dir / (std::string(buf) + ".tsv");
    };
    const auto take_snapshot = [&](const Simulation& s) {
        if (!write_outputs) return;
        const auto path = snapshot_path(snapshot_index);
        write_snapshot_file(path.string(), s.time(), s.particles());
        out.snapshot_files.push_back(path.filename().string());
        if (cfg.output.vtk) {
            const auto vtk = dir / (path.stem().string() + ".vtk");
            write_vtk_file(vtk.string(), s.time(), s.particles());
        }
        ++snapshot_index;
    };
    const auto sample_probes = [&](const Simulation& s) {
        for (std::size_t i = 0; i < out.probes.size(); ++i)
            out.probes[i].samples.push_back(sample_probe(
                s.soil_particles(), s.kernel(), out.probes[i].position, s.time()));
    };

    double next_probe = 0.0;
    double next_snapshot = 0.0;
    const auto on_step = [&](Simulation& s) {
        if (!cfg.probes.empty() && cfg.output.probe_every > 0.0 &&
            s.time() >= next_probe - 1e-12) {
            sample_probes(s);
            next_probe += cfg.output.probe_every;
        }
        if (cfg.output.snapshot_every > 0.0 && s.time() >= next_snapshot - 1e-12) {
            take_snapshot(s);
            next_snapshot += cfg.output.snapshot_every;
        }
    };

    // t = 0 samples
    sample_probes(sim);
    next_probe = cfg.output.probe_every;
    take_snapshot(sim);
    next_snapshot = cfg.output.snapshot_every;

    try {
        if (cfg.loading.method == LoadingMethod::gravity_damped) {
            sim.set_damping({cfg.loading.xi, true});
            const auto r = sim.run_until(cfg.loading.duration, 1e-4, 100, on_step);
            out.early_exit = r.early_exit;
        }
        sim.set_damping({cfg.loading.xi, false});
        if (cfg.analysis.enabled && cfg.analysis.duration > 0.0)
            sim.run_until(sim.time() + cfg.analysis.duration, 0.0, 0, on_step);
    } catch (const SimulationDiverged& e) {
        out.diverged = true;
        out.exit_code = kExitDiverged;
        out.reason = e.what();
        if (write_outputs) {
            const auto path = dir / "snapshot_last_good.tsv";
            write_snapshot_file(path.string(), sim.time(), sim.last_good());
            out.snapshot_files.push_back(path.filename().string());
        }
    }

    if (!out.diverged) {
        sample_probes(sim);
        take_snapshot(sim);
    }

    out.t_final = sim.time();
    out.steps = sim.steps();
    out.expulsion_metric = sim.expulsion_metric();
    out.expelled_from = sim.expelled_from();
    out.degenerate_corrections_peak = sim.degenerate_corrections_peak();

    if (write_outputs) {
        for (const ProbeSeries& series : out.probes) {
            const auto path = dir / ("probe_" + series.label + ".tsv");
            write_probe_file(path.string(), series);
            out.probe_files.push_back(path.filename().string());
        }
        const auto wall = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                        t_start)
                              .count();
        const auto manifest = dir / "manifest.json";
        detail_run::write_manifest(manifest, cfg, sim, out, wall);
        out.manifest_file = manifest.string();
    }
    return out;
}

}  // namespace soilsph
