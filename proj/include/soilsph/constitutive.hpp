#pragma once

#include <cmath>
#include <stdexcept>

#include "soilsph/math2d.hpp"
#include "soilsph/particle.hpp"

namespace soilsph {

/// Standard gravity, consistent with gamma_w = 9.81 kN/m^3 at rho_w = 1000 kg/m^3.
constexpr double kGravity = 9.81;

/// Linear-elastic soil parameters. Moduli are always derived from E and nu.
struct MaterialParams {
    double E = 0.0;            // Young's modulus [Pa]
    double nu = 0.0;           // Poisson's ratio
    double gamma_sat = 0.0;    // saturated unit weight [N/m^3]
    double gamma_unsat = 0.0;  // moist unit weight above the water table [N/m^3]
    double gamma_w = 9810.0;   // unit weight of water [N/m^3]

    double shear_modulus() const { return E / (2.0 * (1.0 + nu)); }
    double bulk_modulus() const { return E / (3.0 * (1.0 - 2.0 * nu)); }

    /// Constrained (oedometer) modulus; governs 1D column wave speed.
    double constrained_modulus() const {
        return E * (1.0 - nu) / ((1.0 + nu) * (1.0 - 2.0 * nu));
    }

    double rho_sat() const { return gamma_sat / kGravity; }
    double rho_unsat() const { return gamma_unsat / kGravity; }

    void validate() const {
        if (!(E > 0.0) || !std::isfinite(E))
            throw std::invalid_argument("Young's modulus must be positive");
        if (!(nu > -1.0 && nu < 0.5))
            throw std::invalid_argument("Poisson ratio must lie in (-1, 0.5)");
    }

    friend bool operator==(const MaterialParams&, const MaterialParams&) = default;
};

/**
 * Jaumann rate of effective stress for a linear-elastic material:
 *
 *   sigma'_dot = 2G (eps_dot - tr(eps_dot)/3 I) + K tr(eps_dot) I
 *                + sigma' w^T + w sigma'
 *
 * where w is the spin tensor (antisymmetric, w_xy = spin_xy). The trace runs
 * over all three components; under plane strain eps_zz = 0 while sigma'_zz
 * evolves with the volumetric term. The spin coupling leaves both stress
 * invariants unchanged under rigid rotation.
 */
inline Sym2 stress_rate(const Sym2& sigma, const Sym2& eps_dot, double spin_xy,
                        const MaterialParams& mat) {
    const double g2 = 2.0 * mat.shear_modulus();
    const double k = mat.bulk_modulus();
    const double tr = eps_dot.trace();
    const double tr3 = tr / 3.0;

    Sym2 rate{
        g2 * (eps_dot.xx - tr3) + k * tr,
        g2 * (eps_dot.yy - tr3) + k * tr,
        g2 * (eps_dot.zz - tr3) + k * tr,
        g2 * eps_dot.xy,
    };

    // sigma w^T + w sigma in 2D reduces to three terms.
    const double w = spin_xy;
    rate.xx += 2.0 * w * sigma.xy;
    rate.yy += -2.0 * w * sigma.xy;
    rate.xy += w * (sigma.yy - sigma.xx);
    return rate;
}

/// Elastic wave speed used by the CFL bound and the artificial viscosity.
inline double sound_speed(const MaterialParams& mat, double rho) {
    return std::sqrt(mat.shear_modulus() / rho);
}

inline double sound_speed(const MaterialParams& mat, const Particle& p) {
    return sound_speed(mat, p.rho);
}

}  // namespace soilsph
