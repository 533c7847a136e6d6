#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <tuple>
#include <vector>

#include "soilsph/particle.hpp"

namespace soilsph {

enum class WallCondition : std::uint8_t {
    none,         // free surface
    free_roller,  // zero normal displacement, free tangential slip (ghost mirror)
    full_fixity,  // zero displacement in both directions (virtual particles)
};

/// Axis-aligned walls of a rectangular bounding box. The band must cover the
/// kernel support (>= 2h) so no interior particle sees a truncated
/// neighborhood toward a wall.
struct BoundarySpec {
    WallCondition left = WallCondition::none;
    WallCondition right = WallCondition::none;
    WallCondition bottom = WallCondition::none;
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;
    double band = 0.0;
};

/// Recipe for one ghost particle: which soil particle it mirrors and across
/// which wall plane(s). Corner ghosts mirror across both axes.
struct GhostRule {
    std::uint32_t source;
    bool mirror_x = false;
    double x_plane = 0.0;
    bool mirror_y = false;
    double y_plane = 0.0;
};

/// Plan mirror ghosts for soil particles within `band + extra` of each
/// free-roller wall. The extra margin keeps the plan valid while particles
/// move less than the neighbor-table skin.
inline std::vector<GhostRule> plan_ghosts(std::span<const Particle> parts, std::size_t n_soil,
                                          const BoundarySpec& spec, double extra = 0.0) {
    const double band = spec.band + extra;
    std::vector<GhostRule> rules;
    for (std::uint32_t i = 0; i < n_soil; ++i) {
        const Vec2& x = parts[i].x;
        const bool near_left =
            spec.left == WallCondition::free_roller && x.x - spec.x_min < band;
        const bool near_right =
            spec.right == WallCondition::free_roller && spec.x_max - x.x < band;
        const bool near_bottom =
            spec.bottom == WallCondition::free_roller && x.y - spec.y_min < band;

        if (near_left) rules.push_back({i, true, spec.x_min, false, 0.0});
        if (near_right) rules.push_back({i, true, spec.x_max, false, 0.0});
        if (near_bottom) rules.push_back({i, false, 0.0, true, spec.y_min});
        if (near_left && near_bottom)
            rules.push_back({i, true, spec.x_min, true, spec.y_min});
        if (near_right && near_bottom)
            rules.push_back({i, true, spec.x_max, true, spec.y_min});
    }
    return rules;
}

/// Write ghost state from the current source state: position and velocity
/// mirrored (normal components negated), stress mirrored with shear
/// sign-flipped per reflection axis, pore pressure and density copied.
inline void apply_ghost_rules(std::span<Particle> parts, std::span<const GhostRule> rules,
                              std::size_t offset) {
    for (std::size_t k = 0; k < rules.size(); ++k) {
        const GhostRule& r = rules[k];
        const Particle& src = parts[r.source];
        Particle& g = parts[offset + k];
        g = src;
        g.kind = ParticleKind::ghost;
        double shear_sign = 1.0;
        if (r.mirror_x) {
            g.x.x = 2.0 * r.x_plane - src.x.x;
            g.v.x = -src.v.x;
            shear_sign = -shear_sign;
        }
        if (r.mirror_y) {
            g.x.y = 2.0 * r.y_plane - src.x.y;
            g.v.y = -src.v.y;
            shear_sign = -shear_sign;
        }
        g.sigma_eff.xy = shear_sign * src.sigma_eff.xy;
    }
}

/**
 * Virtual particles for full-fixity walls: lattice-spaced rows (bottom) or
 * columns (sides) filling the band beyond the wall, at least two deep.
 * Velocity is fixed at zero; stress is re-assigned every step from the
 * nearest interior soil particle. Bottom rows extend `band` past the side
 * walls so corner neighborhoods stay covered.
 *
 * `make` builds the particle for a lattice position (density, mass, pore
 * pressure by elevation); kind and velocity are overridden here.
 */
template <class MakeParticle>
std::vector<Particle> generate_fixed_boundary(const BoundarySpec& spec, double spacing,
                                              MakeParticle&& make) {
    std::vector<Particle> out;
    const int rows = std::max(2, static_cast<int>(std::ceil(spec.band / spacing)));

    const auto emit = [&](double x, double y) {
        Particle p = make(Vec2{x, y});
        p.kind = ParticleKind::virtual_boundary;
        p.v = {};
        out.push_back(p);
    };

    if (spec.bottom == WallCondition::full_fixity) {
        const double x_lo = spec.x_min - spec.band;
        const long cols = std::lround((spec.x_max + spec.band - x_lo) / spacing);
        for (int j = 0; j < rows; ++j) {
            const double y = spec.y_min - (j + 0.5) * spacing;
            for (long i = 0; i < cols; ++i) emit(x_lo + (i + 0.5) * spacing, y);
        }
    }
    for (const auto& [cond, plane, dir] :
         {std::tuple{spec.left, spec.x_min, -1.0}, std::tuple{spec.right, spec.x_max, 1.0}}) {
        if (cond != WallCondition::full_fixity) continue;
        const long ny = std::lround((spec.y_max + spec.band - spec.y_min) / spacing);
        for (int j = 0; j < rows; ++j) {
            const double x = plane + dir * (j + 0.5) * spacing;
            for (long i = 0; i < ny; ++i) emit(x, spec.y_min + (i + 0.5) * spacing);
        }
    }
    return out;
}

/// Nearest soil particle for each virtual particle in [v_begin, v_end).
inline std::vector<std::uint32_t> nearest_soil_sources(std::span<const Particle> parts,
                                                       std::size_t n_soil,
                                                       std::size_t v_begin,
                                                       std::size_t v_end) {
    std::vector<std::uint32_t> sources;
    sources.reserve(v_end - v_begin);
    for (std::size_t v = v_begin; v < v_end; ++v) {
        double best = std::numeric_limits<double>::max();
        std::uint32_t arg = 0;
        for (std::uint32_t s = 0; s < n_soil; ++s) {
            const double d2 = (parts[v].x - parts[s].x).norm2();
            if (d2 < best) {
                best = d2;
                arg = s;
            }
        }
        sources.push_back(arg);
    }
    return sources;
}

/// Zeroth-order stress extrapolation onto the virtual particles.
inline void refresh_virtual_state(std::span<Particle> parts, std::size_t v_begin,
                                  std::span<const std::uint32_t> sources) {
    for (std::size_t k = 0; k < sources.size(); ++k) {
        Particle& p = parts[v_begin + k];
        p.sigma_eff = parts[sources[k]].sigma_eff;
        p.rho = parts[sources[k]].rho;
        p.v = {};
    }
}

}  // namespace soilsph
