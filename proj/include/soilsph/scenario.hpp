#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "soilsph/boundary.hpp"
#include "soilsph/constitutive.hpp"
#include "soilsph/momentum.hpp"

namespace soilsph {

class UnsupportedGeometry : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class GeometryKind : std::uint8_t { rectangle, polygon };

struct Geometry {
    GeometryKind kind = GeometryKind::rectangle;
    double width = 0.0;   // rectangle only
    double height = 0.0;  // rectangle only
    std::vector<Vec2> vertices;  // polygon only, in order

    std::vector<Vec2> polygon() const {
        if (kind == GeometryKind::rectangle)
            return {{0.0, 0.0}, {width, 0.0}, {width, height}, {0.0, height}};
        return vertices;
    }

    friend bool operator==(const Geometry&, const Geometry&) = default;
};

enum class LoadingMethod : std::uint8_t { k0, gravity_damped };

struct LoadingConfig {
    LoadingMethod method = LoadingMethod::gravity_damped;
    double xi = 0.002;
    double duration = 4.0;
    double friction_angle_deg = 30.0;  // K0 method only

    friend bool operator==(const LoadingConfig&, const LoadingConfig&) = default;
};

struct AnalysisConfig {
    bool enabled = false;
    double duration = 0.0;

    friend bool operator==(const AnalysisConfig&, const AnalysisConfig&) = default;
};

struct NumericsConfig {
    double cfl = 0.1;
    double skin_fraction = 0.1;  // neighbor-rebuild skin, as a fraction of spacing
    double alpha_visc = 0.1;
    double beta_visc = 0.1;
    bool artificial_stress = false;
    double eps_as = 0.3;
    double n_as = 2.55;
    bool continuity = true;
    bool kernel_correction = true;
    StressForm stress_form = StressForm::rhoab;
    PoreWaterForm pwater_form = PoreWaterForm::corrected_difference;
    double gravity = kGravity;  // body-force magnitude, applied as (0, -gravity)
    bool deterministic = true;
    double perturb_v = 0.0;  // optional random velocity perturbation amplitude [m/s]
    std::uint64_t seed = 0;
    int dt_recompute_every = 10;

    friend bool operator==(const NumericsConfig&, const NumericsConfig&) = default;
};

struct Probe {
    std::string label;
    Vec2 position;

    friend bool operator==(const Probe&, const Probe&) = default;
};

struct OutputConfig {
    std::string directory = "out";
    double snapshot_every = 0.5;
    double probe_every = 0.005;
    bool vtk = false;

    friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct ScenarioConfig {
    int schema_version = 1;
    std::string name;
    Geometry geometry;
    double spacing = 0.0;
    double h_ratio = 1.2;  // h = h_ratio * spacing
    double water_level = 0.0;
    MaterialParams material;
    WallCondition left = WallCondition::free_roller;
    WallCondition right = WallCondition::free_roller;
    WallCondition bottom = WallCondition::full_fixity;
    LoadingConfig loading;
    AnalysisConfig analysis;
    NumericsConfig numerics;
    std::vector<Probe> probes;
    OutputConfig output;

    double h() const { return h_ratio * spacing; }

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Even-odd ray cast.
inline bool point_in_polygon(const Vec2& p, std::span<const Vec2> poly) {
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        if ((a.y > p.y) != (b.y > p.y) &&
            p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)
            inside = !inside;
    }
    return inside;
}

/// Initial soil-surface elevation per lattice column; used for the expulsion
/// metric and the analytic column solutions.
class SurfaceProfile {
public:
    SurfaceProfile() = default;
    SurfaceProfile(double x0, double dx, std::vector<double> top)
        : x0_(x0), dx_(dx), top_(std::move(top)) {}

    /// Surface elevation above the column containing x (clamped at the ends).
    double elevation(double x) const {
        if (top_.empty()) return 0.0;
        auto i = static_cast<std::ptrdiff_t>(std::floor((x - x0_) / dx_));
        i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(top_.size()) - 1);
        return top_[static_cast<std::size_t>(i)];
    }

    bool horizontal(double tol) const {
        for (double t : top_)
            if (std::abs(t - top_.front()) > tol) return false;
        return true;
    }

private:
    double x0_ = 0.0;
    double dx_ = 1.0;
    std::vector<double> top_;
};

/// Hydrostatic pore pressure below the water table, compression negative.
inline double hydrostatic_pw(double y, double water_level, double gamma_w) {
    return y <= water_level ? -gamma_w * (water_level - y) : 0.0;
}

/// Vertical effective stress of a layered column: moist unit weight above
/// the water table, buoyant unit weight below. Water standing above the soil
/// surface adds no effective stress.
inline double analytic_sigma_v_eff(double surface, double y, double water_level,
                                   const MaterialParams& mat) {
    const double above = std::max(0.0, surface - std::max(y, water_level));
    const double below = std::max(0.0, std::min(surface, water_level) - y);
    return -(mat.gamma_unsat * above + (mat.gamma_sat - mat.gamma_w) * below);
}

/// Vertical total stress of the same column (effective plus pore pressure).
inline double analytic_sigma_v_total(double surface, double y, double water_level,
                                     const MaterialParams& mat) {
    return analytic_sigma_v_eff(surface, y, water_level, mat) +
           hydrostatic_pw(y, water_level, mat.gamma_w);
}

/// Uniform cell-centered lattice filling the scenario polygon. Density comes
/// from the saturated unit weight below the water level and the moist one
/// above; m = rho0 * dx^2 per unit thickness.
inline std::vector<Particle> build_lattice(const ScenarioConfig& cfg) {
    const auto poly = cfg.geometry.polygon();
    if (poly.size() < 3) throw std::invalid_argument("geometry polygon is degenerate");
    if (!(cfg.spacing > 0.0)) throw std::invalid_argument("particle spacing must be positive");

    double x_lo = poly[0].x, x_hi = poly[0].x, y_lo = poly[0].y, y_hi = poly[0].y;
    for (const Vec2& v : poly) {
        x_lo = std::min(x_lo, v.x);
        x_hi = std::max(x_hi, v.x);
        y_lo = std::min(y_lo, v.y);
        y_hi = std::max(y_hi, v.y);
    }
    if (!(x_hi > x_lo && y_hi > y_lo))
        throw std::invalid_argument("geometry polygon is degenerate");

    const double dx = cfg.spacing;
    const long nx = std::lround((x_hi - x_lo) / dx);
    const long ny = std::lround((y_hi - y_lo) / dx);

    std::vector<Particle> parts;
    for (long j = 0; j < ny; ++j) {
        const double y = y_lo + (j + 0.5) * dx;
        for (long i = 0; i < nx; ++i) {
            const double x = x_lo + (i + 0.5) * dx;
            if (!point_in_polygon({x, y}, poly)) continue;
            Particle p;
            p.x = {x, y};
            p.rho0 = y <= cfg.water_level ? cfg.material.rho_sat() : cfg.material.rho_unsat();
            p.rho = p.rho0;
            p.m = p.rho0 * dx * dx;
            parts.push_back(p);
        }
    }
    if (parts.empty()) throw std::invalid_argument("geometry contains no lattice points");
    return parts;
}

inline SurfaceProfile surface_profile(std::span<const Particle> soil, double x_lo, double x_hi,
                                      double dx) {
    const long nx = std::lround((x_hi - x_lo) / dx);
    std::vector<double> top(static_cast<std::size_t>(nx),
                            -std::numeric_limits<double>::infinity());
    for (const Particle& p : soil) {
        auto i = static_cast<std::ptrdiff_t>(std::floor((p.x.x - x_lo) / dx));
        i = std::clamp<std::ptrdiff_t>(i, 0, nx - 1);
        top[static_cast<std::size_t>(i)] =
            std::max(top[static_cast<std::size_t>(i)], p.x.y + 0.5 * dx);
    }
    return {x_lo, dx, std::move(top)};
}

/// p_w = -gamma_w (H_w - y) below the water level, zero above.
inline void assign_pore_pressure(std::span<Particle> parts, double water_level,
                                 double gamma_w) {
    for (Particle& p : parts) p.p_w = hydrostatic_pw(p.x.y, water_level, gamma_w);
}

/// Jaky K0 initial stresses; only valid for a horizontal ground surface and
/// a horizontal water table.
inline void k0_initialize(std::span<Particle> parts, const SurfaceProfile& surface,
                          double water_level, const MaterialParams& mat, double phi_deg,
                          double horizontal_tol) {
    if (!surface.horizontal(horizontal_tol))
        throw UnsupportedGeometry("K0 initialization requires a horizontal ground surface");
    const double k0 = 1.0 - std::sin(phi_deg * std::numbers::pi / 180.0);
    for (Particle& p : parts) {
        const double sv = analytic_sigma_v_eff(surface.elevation(p.x.x), p.x.y, water_level, mat);
        p.sigma_eff = {k0 * sv, sv, k0 * sv, 0.0};
    }
}

/// Assembled initial state: soil lattice, virtual boundary particles, wall
/// spec, and the surface profile.
struct ScenarioState {
    std::vector<Particle> soil;
    std::vector<Particle> virtuals;
    BoundarySpec walls;
    SurfaceProfile surface;
    std::vector<MaterialParams> materials;
};

inline ScenarioState build_scenario(const ScenarioConfig& cfg) {
    cfg.material.validate();
    ScenarioState st;
    st.materials = {cfg.material};
    st.soil = build_lattice(cfg);

    const auto poly = cfg.geometry.polygon();
    double x_lo = poly[0].x, x_hi = poly[0].x, y_lo = poly[0].y, y_hi = poly[0].y;
    for (const Vec2& v : poly) {
        x_lo = std::min(x_lo, v.x);
        x_hi = std::max(x_hi, v.x);
        y_lo = std::min(y_lo, v.y);
        y_hi = std::max(y_hi, v.y);
    }
    st.walls = {cfg.left, cfg.right, cfg.bottom, x_lo, x_hi, y_lo, y_hi, 2.0 * cfg.h()};
    st.surface = surface_profile(st.soil, x_lo, x_hi, cfg.spacing);

    st.virtuals = generate_fixed_boundary(st.walls, cfg.spacing, [&](const Vec2& x) {
        Particle p;
        p.x = x;
        p.rho0 = x.y <= cfg.water_level ? cfg.material.rho_sat() : cfg.material.rho_unsat();
        p.rho = p.rho0;
        p.m = p.rho0 * cfg.spacing * cfg.spacing;
        return p;
    });

    assign_pore_pressure(st.soil, cfg.water_level, cfg.material.gamma_w);
    assign_pore_pressure(st.virtuals, cfg.water_level, cfg.material.gamma_w);

    if (cfg.loading.method == LoadingMethod::k0) {
        k0_initialize(st.soil, st.surface, cfg.water_level, cfg.material,
                      cfg.loading.friction_angle_deg, 0.51 * cfg.spacing);
        k0_initialize(st.virtuals, st.surface, cfg.water_level, cfg.material,
                      cfg.loading.friction_angle_deg, 0.51 * cfg.spacing);
    }

    if (cfg.numerics.perturb_v > 0.0) {
        std::mt19937_64 rng(cfg.numerics.seed);
        const auto uniform = [&rng] {  // in [-1, 1), reproducible across platforms
            return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
        };
        for (Particle& p : st.soil)
            p.v += cfg.numerics.perturb_v * Vec2{uniform(), uniform()};
    }
    return st;
}

}  // namespace soilsph
