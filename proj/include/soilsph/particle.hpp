#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "soilsph/math2d.hpp"

namespace soilsph {

enum class ParticleKind : std::uint8_t {
    soil,
    ghost,             // free-roller mirror image, regenerated every step
    virtual_boundary,  // full-fixity wall particle, position fixed
};

constexpr std::string_view to_string(ParticleKind k) {
    switch (k) {
        case ParticleKind::soil: return "soil";
        case ParticleKind::ghost: return "ghost";
        case ParticleKind::virtual_boundary: return "virtual_boundary";
    }
    return "?";
}

/// One SPH particle. Stress and pore pressure are negative in compression;
/// submerged particles carry p_w <= 0.
struct Particle {
    Vec2 x;                  // position [m]
    Vec2 v;                  // velocity [m/s]
    double rho = 0.0;        // current density [kg/m^3]
    double rho0 = 0.0;       // reference density [kg/m^3]
    double m = 0.0;          // mass per unit thickness [kg]
    Sym2 sigma_eff;          // effective stress [Pa]
    double p_w = 0.0;        // pore-water pressure [Pa]
    ParticleKind kind = ParticleKind::soil;
    int material_id = 0;
};

inline double total_mass(std::span<const Particle> parts) {
    double m = 0.0;
    for (const Particle& p : parts) m += p.m;
    return m;
}

}  // namespace soilsph
