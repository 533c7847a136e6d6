#pragma once

#include <cmath>
#include <span>

#include "soilsph/constitutive.hpp"
#include "soilsph/kernel.hpp"
#include "soilsph/sph_operators.hpp"

namespace soilsph {

/// Which symmetrized stress-divergence discretization to use.
enum class StressForm {
    rho2,   // sum m_b (sigma_a/rho_a^2 + sigma_b/rho_b^2) grad_W
    rhoab,  // sum m_b (sigma_a + sigma_b)/(rho_a rho_b) grad_W
};

/// Pore-water pressure gradient discretization. The conventional sum form
/// leaves a spurious surface force proportional to p_w on particles with a
/// truncated neighborhood; the corrected difference form vanishes termwise
/// on constant fields and is the default.
enum class PoreWaterForm {
    conventional_sum,      // (p_wb + p_wa) pair factor
    corrected_difference,  // (p_wb - p_wa) pair factor
};

struct FormulationSwitch {
    StressForm stress_form = StressForm::rhoab;
    PoreWaterForm pwater_form = PoreWaterForm::corrected_difference;
    bool damping_on = false;
};

struct StabilizationParams {
    double alpha_visc = 0.1;  // linear artificial-viscosity coefficient
    double beta_visc = 0.1;   // quadratic coefficient
    bool viscosity_on = true;
    bool artificial_stress_on = false;
    double eps_as = 0.3;      // tensile-correction magnitude
    double n_as = 2.55;       // kernel-ratio exponent
    double spacing = 0.0;     // initial particle spacing, sets the kernel ratio
};

struct DampingParams {
    double xi = 0.0;      // non-dimensional coefficient, c_d = xi/dt
    bool active = false;  // loading phase only
};

/// Acceleration from the effective-stress divergence (no stabilization).
inline Vec2 accel_effective_stress(std::span<const Particle> parts, const NeighborTable& table,
                                   std::span<const Mat2> correction, std::size_t a,
                                   StressForm form, bool corrected) {
    const Particle& pa = parts[a];
    const double inv_rhoa2 = 1.0 / (pa.rho * pa.rho);
    Vec2 acc;
    for (const NeighborEntry& n : table.neighbors_of(a)) {
        const Particle& pb = parts[n.j];
        const Vec2 gw = detail::corrected(correction[a], n.grad_w, corrected);
        Sym2 s;
        if (form == StressForm::rho2) {
            s = inv_rhoa2 * pa.sigma_eff + (1.0 / (pb.rho * pb.rho)) * pb.sigma_eff;
        } else {
            s = (1.0 / (pa.rho * pb.rho)) * (pa.sigma_eff + pb.sigma_eff);
        }
        acc += pb.m * s.mul(gw);
    }
    return acc;
}

/// Acceleration from the pore-water pressure gradient, (grad p_w / rho)_a.
inline Vec2 accel_porewater(std::span<const Particle> parts, const NeighborTable& table,
                            std::span<const Mat2> correction, std::size_t a,
                            PoreWaterForm form, bool corrected) {
    const Particle& pa = parts[a];
    Vec2 acc;
    for (const NeighborEntry& n : table.neighbors_of(a)) {
        const Particle& pb = parts[n.j];
        const Vec2 gw = detail::corrected(correction[a], n.grad_w, corrected);
        const double pair = form == PoreWaterForm::conventional_sum ? pb.p_w + pa.p_w
                                                                    : pb.p_w - pa.p_w;
        acc += pb.m / (pa.rho * pb.rho) * pair * gw;
    }
    return acc;
}

inline Vec2 accel_porewater_conventional(std::span<const Particle> parts,
                                         const NeighborTable& table,
                                         std::span<const Mat2> correction, std::size_t a,
                                         bool corrected = true) {
    return accel_porewater(parts, table, correction, a, PoreWaterForm::conventional_sum,
                           corrected);
}

inline Vec2 accel_porewater_corrected(std::span<const Particle> parts,
                                      const NeighborTable& table,
                                      std::span<const Mat2> correction, std::size_t a,
                                      bool corrected = true) {
    return accel_porewater(parts, table, correction, a, PoreWaterForm::corrected_difference,
                           corrected);
}

/**
 * Monaghan artificial viscosity. Positive when the pair approaches,
 * zero when separating:
 *
 *   mu = h v_ab.r_ab / (|r_ab|^2 + 0.01 h^2)
 *   Pi = (-alpha c_bar mu + beta mu^2) / rho_bar      (v_ab.r_ab < 0)
 */
inline double monaghan_viscosity(const Vec2& v_ab, const Vec2& r_ab, double dist2, double h,
                                 double c_bar, double rho_bar, double alpha, double beta) {
    const double vr = v_ab.dot(r_ab);
    if (vr >= 0.0) return 0.0;
    const double mu = h * vr / (dist2 + 0.01 * h * h);
    return (-alpha * c_bar * mu + beta * mu * mu) / rho_bar;
}

/// Per-particle artificial-stress tensor: the tensile part of the principal
/// stresses, flipped repulsive and scaled by eps_as. Zero in compression.
inline Sym2 artificial_stress_tensor(const Sym2& sigma, double eps_as) {
    const double theta = 0.5 * std::atan2(2.0 * sigma.xy, sigma.xx - sigma.yy);
    const double c = std::cos(theta), s = std::sin(theta);
    const double s1 = c * c * sigma.xx + s * s * sigma.yy + 2.0 * s * c * sigma.xy;
    const double s2 = s * s * sigma.xx + c * c * sigma.yy - 2.0 * s * c * sigma.xy;
    const double r1 = s1 > 0.0 ? -eps_as * s1 : 0.0;
    const double r2 = s2 > 0.0 ? -eps_as * s2 : 0.0;
    if (r1 == 0.0 && r2 == 0.0) return {};
    return {c * c * r1 + s * s * r2, s * s * r1 + c * c * r2, 0.0, s * c * (r1 - r2)};
}

/// Pairwise stabilization tensor C_ab = -Pi_ab I + artificial stress,
/// entering the momentum sums alongside the stress terms.
inline Sym2 stabilization_term(const Particle& pa, const Particle& pb, const Vec2& r_ab,
                               double dist, const StabilizationParams& sp, StressForm form,
                               double h, double c_a, double c_b, double w_ab, double w_dp) {
    Sym2 c;
    if (sp.viscosity_on) {
        const double pi = monaghan_viscosity(pa.v - pb.v, r_ab, dist * dist, h,
                                             0.5 * (c_a + c_b), 0.5 * (pa.rho + pb.rho),
                                             sp.alpha_visc, sp.beta_visc);
        c.xx -= pi;
        c.yy -= pi;
    }
    if (sp.artificial_stress_on && w_dp > 0.0) {
        const double f = std::pow(w_ab / w_dp, sp.n_as);
        const Sym2 ra = artificial_stress_tensor(pa.sigma_eff, sp.eps_as);
        const Sym2 rb = artificial_stress_tensor(pb.sigma_eff, sp.eps_as);
        if (form == StressForm::rho2)
            c += f * ((1.0 / (pa.rho * pa.rho)) * ra + (1.0 / (pb.rho * pb.rho)) * rb);
        else
            c += (f / (pa.rho * pb.rho)) * (ra + rb);
    }
    return c;
}

/// Acceleration from the stabilization terms alone.
inline Vec2 accel_stabilization(std::span<const Particle> parts, const NeighborTable& table,
                                std::span<const Mat2> correction, std::size_t a,
                                const StabilizationParams& sp, StressForm form,
                                std::span<const MaterialParams> mats,
                                const CubicSplineKernel& kernel, bool corrected) {
    if (!sp.viscosity_on && !sp.artificial_stress_on) return {};
    const Particle& pa = parts[a];
    const double c_a = sound_speed(mats[pa.material_id], pa);
    const double w_dp = sp.spacing > 0.0 ? kernel.w(sp.spacing) : 0.0;
    Vec2 acc;
    for (const NeighborEntry& n : table.neighbors_of(a)) {
        const Particle& pb = parts[n.j];
        const Vec2 gw = detail::corrected(correction[a], n.grad_w, corrected);
        const double c_b = sound_speed(mats[pb.material_id], pb);
        const Sym2 c = stabilization_term(pa, pb, n.r_ab, n.dist, sp, form, kernel.h(), c_a,
                                          c_b, kernel.w(n.dist), w_dp);
        acc += pb.m * c.mul(gw);
    }
    return acc;
}

/// D_a = -(xi/dt) v_a; opposes velocity during the stress-loading phase.
inline Vec2 damping_acceleration(const Vec2& v, double xi, double dt) {
    return (-xi / dt) * v;
}

struct ForceContext {
    std::span<const Particle> parts;
    const NeighborTable* table = nullptr;
    std::span<const Mat2> correction;
    std::span<const MaterialParams> materials;
    const CubicSplineKernel* kernel = nullptr;
    FormulationSwitch form;
    bool kernel_correction = true;
    StabilizationParams stabilization;
    DampingParams damping;
    double dt = 0.0;
    Vec2 gravity{0.0, -kGravity};
    std::size_t step = 0;
};

/// Total acceleration of particle a: effective-stress divergence,
/// pore-pressure gradient, stabilization, phase-gated damping, and gravity.
inline Vec2 total_acceleration(const ForceContext& ctx, std::size_t a) {
    Vec2 acc = accel_effective_stress(ctx.parts, *ctx.table, ctx.correction, a,
                                      ctx.form.stress_form, ctx.kernel_correction);
    acc += accel_porewater(ctx.parts, *ctx.table, ctx.correction, a, ctx.form.pwater_form,
                           ctx.kernel_correction);
    acc += accel_stabilization(ctx.parts, *ctx.table, ctx.correction, a, ctx.stabilization,
                               ctx.form.stress_form, ctx.materials, *ctx.kernel,
                               ctx.kernel_correction);
    if (ctx.damping.active && ctx.damping.xi > 0.0 && ctx.dt > 0.0)
        acc += damping_acceleration(ctx.parts[a].v, ctx.damping.xi, ctx.dt);
    acc += ctx.gravity;
    if (!acc.finite()) throw SimulationDiverged(ctx.step, a, "acceleration");
    return acc;
}

}  // namespace soilsph
