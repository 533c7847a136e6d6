#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "soilsph/boundary.hpp"
#include "soilsph/momentum.hpp"
#include "soilsph/scenario.hpp"

namespace soilsph {

struct SimSettings {
    double h = 0.0;
    double spacing = 0.0;
    double cfl = 0.1;
    double skin_fraction = 0.1;
    bool kernel_correction = true;
    bool continuity = true;
    StressForm stress_form = StressForm::rhoab;
    PoreWaterForm pwater_form = PoreWaterForm::corrected_difference;
    StabilizationParams stabilization;
    Vec2 gravity{0.0, -kGravity};
    int dt_recompute_every = 10;

    static SimSettings from(const ScenarioConfig& cfg) {
        SimSettings s;
        s.h = cfg.h();
        s.spacing = cfg.spacing;
        s.cfl = cfg.numerics.cfl;
        s.skin_fraction = cfg.numerics.skin_fraction;
        s.kernel_correction = cfg.numerics.kernel_correction;
        s.continuity = cfg.numerics.continuity;
        s.stress_form = cfg.numerics.stress_form;
        s.pwater_form = cfg.numerics.pwater_form;
        s.stabilization.alpha_visc = cfg.numerics.alpha_visc;
        s.stabilization.beta_visc = cfg.numerics.beta_visc;
        s.stabilization.viscosity_on =
            cfg.numerics.alpha_visc > 0.0 || cfg.numerics.beta_visc > 0.0;
        s.stabilization.artificial_stress_on = cfg.numerics.artificial_stress;
        s.stabilization.eps_as = cfg.numerics.eps_as;
        s.stabilization.n_as = cfg.numerics.n_as;
        s.stabilization.spacing = cfg.spacing;
        s.gravity = {0.0, -cfg.numerics.gravity};
        s.dt_recompute_every = cfg.numerics.dt_recompute_every;
        return s;
    }
};

/**
 * Explicit kick-drift-kick leapfrog over the particle system. Velocities,
 * positions, and stresses are synchronized at full steps; the stress and
 * density rates are integrated with the half-step velocities.
 *
 * Step phases: kick; drift; boundary regeneration (ghost mirrors re-applied
 * every step, re-planned when the neighbor skin is exceeded); neighbor
 * refresh; correction matrices; strain/spin rates; stress + continuity
 * update; acceleration assembly; kick.
 *
 * Single-threaded with index-sorted neighbor lists, so repeated runs are
 * bit-identical.
 */
class Simulation {
public:
    Simulation(std::vector<Particle> soil, std::vector<Particle> virtuals, BoundarySpec walls,
               std::vector<MaterialParams> materials, SimSettings settings)
        : cfg_(settings),
          walls_(walls),
          materials_(std::move(materials)),
          kernel_(settings.h),
          parts_(std::move(soil)),
          n_soil_(parts_.size()) {
        parts_.insert(parts_.end(), virtuals.begin(), virtuals.end());
        n_virtual_ = parts_.size() - n_soil_;
        virtual_sources_ =
            nearest_soil_sources(parts_, n_soil_, n_soil_, n_soil_ + n_virtual_);
        initial_x_.reserve(n_soil_);
        for (std::size_t i = 0; i < n_soil_; ++i) initial_x_.push_back(parts_[i].x);

        rebuild_tables();
        refresh_boundary_values();
        eps_rate_.resize(n_soil_);
        spin_rate_.resize(n_soil_);
        dt_ = stable_dt();
        dt_history_.emplace_back(0, dt_);
        last_good_ = parts_;
    }

    void set_damping(const DampingParams& d) {
        damping_ = d;
        accel_valid_ = false;
    }
    const DampingParams& damping() const { return damping_; }

    void set_surface_profile(SurfaceProfile profile) { surface_ = std::move(profile); }

    double time() const { return t_; }
    std::size_t steps() const { return step_; }
    double dt() const { return dt_; }

    std::span<const Particle> particles() const { return parts_; }
    std::span<const Particle> soil_particles() const {
        return std::span<const Particle>(parts_).first(n_soil_);
    }
    std::size_t soil_count() const { return n_soil_; }
    std::span<const Vec2> initial_positions() const { return initial_x_; }
    std::span<const Particle> last_good() const { return last_good_; }

    const NeighborTable& table() const { return table_; }
    std::span<const Mat2> corrections() const { return corrections_.l; }
    Vec2 acceleration(std::size_t i) const { return accel_[i]; }
    const CubicSplineKernel& kernel() const { return kernel_; }
    std::span<const MaterialParams> materials() const { return materials_; }

    std::size_t degenerate_corrections() const { return corrections_.degenerate; }
    std::size_t degenerate_corrections_peak() const { return degenerate_peak_; }
    std::span<const std::pair<std::size_t, double>> dt_history() const { return dt_history_; }

    double max_soil_speed() const {
        double m = 0.0;
        for (std::size_t i = 0; i < n_soil_; ++i) m = std::max(m, parts_[i].v.norm2());
        return std::sqrt(m);
    }

    double kinetic_energy() const {
        double e = 0.0;
        for (std::size_t i = 0; i < n_soil_; ++i)
            e += 0.5 * parts_[i].m * parts_[i].v.norm2();
        return e;
    }

    /// Running maximum of soil elevation above the initial surface profile.
    double expulsion_metric() const { return expulsion_; }
    std::optional<Vec2> expelled_from() const { return expelled_from_; }

    /// CFL bound: cfl * h / max(c_a + |v_a|).
    double stable_dt() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < n_soil_; ++i) {
            const Particle& p = parts_[i];
            worst = std::max(worst, sound_speed(materials_[p.material_id], p) + p.v.norm());
        }
        return cfg_.cfl * cfg_.h / worst;
    }

    ForceContext force_context() {
        ensure_accelerations();
        return make_context();
    }

    void step() {
        ensure_accelerations();

        const double half = 0.5 * dt_;
        for (std::size_t i = 0; i < n_soil_; ++i) parts_[i].v += half * accel_[i];
        for (std::size_t i = 0; i < n_soil_; ++i) parts_[i].x += dt_ * parts_[i].v;

        sync_boundary_geometry();
        corrections_ = compute_corrections(parts_, table_, n_soil_);
        degenerate_peak_ = std::max(degenerate_peak_, corrections_.degenerate);

        for (std::size_t i = 0; i < n_soil_; ++i) {
            const Mat2 d = velocity_gradient(parts_, table_, corrections_.l, i,
                                             cfg_.kernel_correction);
            eps_rate_[i] = strain_rate_from(d);
            spin_rate_[i] = spin_rate_from(d);
        }
        for (std::size_t i = 0; i < n_soil_; ++i) {
            Particle& p = parts_[i];
            p.sigma_eff += dt_ * stress_rate(p.sigma_eff, eps_rate_[i], spin_rate_[i],
                                             materials_[p.material_id]);
            if (!p.sigma_eff.finite()) throw SimulationDiverged(step_, i, "sigma_eff");
        }
        if (cfg_.continuity) {
            for (std::size_t i = 0; i < n_soil_; ++i)
                parts_[i].rho = continuity_update(parts_, table_, corrections_.l, i, dt_,
                                                  cfg_.kernel_correction, step_);
        }

        refresh_boundary_values();
        compute_accelerations();
        for (std::size_t i = 0; i < n_soil_; ++i) {
            parts_[i].v += half * accel_[i];
            if (!parts_[i].x.finite()) throw SimulationDiverged(step_, i, "position");
            if (!parts_[i].v.finite()) throw SimulationDiverged(step_, i, "velocity");
        }

        t_ += dt_;
        ++step_;
        update_expulsion();
        last_good_ = parts_;

        if (cfg_.dt_recompute_every > 0 && step_ % cfg_.dt_recompute_every == 0) {
            const double next = stable_dt();
            if (next != dt_) dt_history_.emplace_back(step_, next);
            dt_ = next;
        }
    }

    struct RunResult {
        bool early_exit = false;
        double t_end = 0.0;
        std::size_t steps = 0;
    };

    /// Advance until t_end. With an early-exit threshold, stops once the
    /// peak soil speed stays below it for `sustain` consecutive steps.
    RunResult run_until(double t_end, double early_exit_speed = 0.0,
                        std::size_t sustain = 100,
                        const std::function<void(Simulation&)>& on_step = {}) {
        RunResult r;
        std::size_t quiet = 0;
        while (t_ < t_end - 1e-15) {
            step();
            if (on_step) on_step(*this);
            if (early_exit_speed > 0.0) {
                quiet = max_soil_speed() < early_exit_speed ? quiet + 1 : 0;
                if (quiet >= sustain) {
                    r.early_exit = true;
                    break;
                }
            }
        }
        r.t_end = t_;
        r.steps = step_;
        return r;
    }

private:
    ForceContext make_context() {
        ForceContext ctx;
        ctx.parts = parts_;
        ctx.table = &table_;
        ctx.correction = corrections_.l;
        ctx.materials = materials_;
        ctx.kernel = &kernel_;
        ctx.form = {cfg_.stress_form, cfg_.pwater_form, damping_.active};
        ctx.kernel_correction = cfg_.kernel_correction;
        ctx.stabilization = cfg_.stabilization;
        ctx.damping = damping_;
        ctx.dt = dt_;
        ctx.gravity = cfg_.gravity;
        ctx.step = step_;
        return ctx;
    }

    void rebuild_tables() {
        const double extra = 2.0 * skin();
        ghost_rules_ = plan_ghosts(parts_, n_soil_, walls_, extra);
        parts_.resize(n_soil_ + n_virtual_ + ghost_rules_.size());
        apply_ghost_rules(parts_, ghost_rules_, n_soil_ + n_virtual_);
        table_ = build_neighbors(parts_, cfg_.h, 2.0 * cfg_.h, extra);
        corrections_ = compute_corrections(parts_, table_, n_soil_);
        degenerate_peak_ = std::max(degenerate_peak_, corrections_.degenerate);
    }

    void sync_boundary_geometry() {
        if (table_.needs_rebuild(parts_, skin())) {
            rebuild_tables();
        } else {
            apply_ghost_rules(parts_, ghost_rules_, n_soil_ + n_virtual_);
            table_.refresh_geometry(parts_, kernel_);
        }
    }

    void refresh_boundary_values() {
        apply_ghost_rules(parts_, ghost_rules_, n_soil_ + n_virtual_);
        refresh_virtual_state(parts_, n_soil_, virtual_sources_);
    }

    void compute_accelerations() {
        accel_.assign(parts_.size(), Vec2{});
        const ForceContext ctx = make_context();
        for (std::size_t i = 0; i < n_soil_; ++i) accel_[i] = total_acceleration(ctx, i);
        accel_valid_ = true;
    }

    void ensure_accelerations() {
        if (!accel_valid_) compute_accelerations();
    }

    void update_expulsion() {
        if (!surface_) return;
        for (std::size_t i = 0; i < n_soil_; ++i) {
            const double e = parts_[i].x.y - surface_->elevation(parts_[i].x.x);
            if (e > expulsion_) {
                expulsion_ = e;
                expelled_from_ = initial_x_[i];
            }
        }
    }

    double skin() const { return cfg_.skin_fraction * cfg_.spacing; }

    SimSettings cfg_;
    BoundarySpec walls_;
    std::vector<MaterialParams> materials_;
    CubicSplineKernel kernel_;

    std::vector<Particle> parts_;
    std::size_t n_soil_ = 0;
    std::size_t n_virtual_ = 0;
    std::vector<GhostRule> ghost_rules_;
    std::vector<std::uint32_t> virtual_sources_;
    std::vector<Vec2> initial_x_;

    NeighborTable table_;
    CorrectionField corrections_;
    std::vector<Sym2> eps_rate_;
    std::vector<double> spin_rate_;
    std::vector<Vec2> accel_;
    bool accel_valid_ = false;

    DampingParams damping_;
    std::optional<SurfaceProfile> surface_;
    double expulsion_ = 0.0;
    std::optional<Vec2> expelled_from_;

    double t_ = 0.0;
    std::size_t step_ = 0;
    double dt_ = 0.0;
    std::vector<std::pair<std::size_t, double>> dt_history_;
    std::size_t degenerate_peak_ = 0;
    std::vector<Particle> last_good_;
};

}  // namespace soilsph
