#pragma once

#include <span>
#include <stdexcept>
#include <string>

#include "soilsph/kernel_correction.hpp"

namespace soilsph {

/// The four SPH gradient approximation forms.
enum class GradientForm {
    basic,            // sum m_b A_b / rho_b grad_W
    difference,       // sum m_b (A_b - A_a) / rho_b grad_W; vanishes on constants
    symmetric_rho2,   // rho_a sum m_b (A_a/rho_a^2 + A_b/rho_b^2) grad_W
    symmetric_rhoab,  // rho_a sum m_b (A_a + A_b) / (rho_a rho_b) grad_W
};

namespace detail {
inline Vec2 corrected(const Mat2& l, const Vec2& g, bool apply) {
    return apply ? l.mul(g) : g;
}
}  // namespace detail

/// SPH gradient of a scalar field sampled at the particles.
inline Vec2 sph_gradient(std::span<const double> field, std::span<const Particle> parts,
                         const NeighborTable& table, std::span<const Mat2> correction,
                         std::size_t a, GradientForm form, bool corrected) {
    const Particle& pa = parts[a];
    const double aa = field[a];
    Vec2 grad;
    for (const NeighborEntry& n : table.neighbors_of(a)) {
        const Particle& pb = parts[n.j];
        const Vec2 gw = detail::corrected(correction[a], n.grad_w, corrected);
        double coeff = 0.0;
        switch (form) {
            case GradientForm::basic:
                coeff = pb.m * field[n.j] / pb.rho;
                break;
            case GradientForm::difference:
                coeff = pb.m * (field[n.j] - aa) / pb.rho;
                break;
            case GradientForm::symmetric_rho2:
                coeff = pa.rho * pb.m *
                        (aa / (pa.rho * pa.rho) + field[n.j] / (pb.rho * pb.rho));
                break;
            case GradientForm::symmetric_rhoab:
                coeff = pb.m * (aa + field[n.j]) / pb.rho;
                break;
        }
        grad += coeff * gw;
    }
    return grad;
}

/// Difference-form estimate of the velocity gradient, D[i][j] ~ dv_i/dx_j.
inline Mat2 velocity_gradient(std::span<const Particle> parts, const NeighborTable& table,
                              std::span<const Mat2> correction, std::size_t a,
                              bool corrected) {
    const Vec2 va = parts[a].v;
    Mat2 d;
    for (const NeighborEntry& n : table.neighbors_of(a)) {
        const Particle& pb = parts[n.j];
        const Vec2 gw = detail::corrected(correction[a], n.grad_w, corrected);
        const double vol = pb.m / pb.rho;
        const Vec2 dv = pb.v - va;
        d.a11 += vol * dv.x * gw.x;
        d.a12 += vol * dv.x * gw.y;
        d.a21 += vol * dv.y * gw.x;
        d.a22 += vol * dv.y * gw.y;
    }
    return d;
}

/// Symmetric part of the velocity gradient. Plane strain: eps_zz = 0.
inline Sym2 strain_rate_from(const Mat2& d) {
    return {d.a11, d.a22, 0.0, 0.5 * (d.a12 + d.a21)};
}

/// Antisymmetric part; returns the xy component (the only independent one
/// in 2D), w = (dv_x/dy - dv_y/dx) / 2.
inline double spin_rate_from(const Mat2& d) { return 0.5 * (d.a12 - d.a21); }

inline Sym2 strain_rate(std::span<const Particle> parts, const NeighborTable& table,
                        std::span<const Mat2> correction, std::size_t a, bool corrected) {
    return strain_rate_from(velocity_gradient(parts, table, correction, a, corrected));
}

inline double spin_rate_xy(std::span<const Particle> parts, const NeighborTable& table,
                           std::span<const Mat2> correction, std::size_t a, bool corrected) {
    return spin_rate_from(velocity_gradient(parts, table, correction, a, corrected));
}

class SimulationDiverged : public std::runtime_error {
public:
    SimulationDiverged(std::size_t step, std::size_t particle, std::string field)
        : std::runtime_error("simulation diverged at step " + std::to_string(step) +
                             ", particle " + std::to_string(particle) + ", field " + field),
          step(step), particle(particle), field(std::move(field)) {}

    std::size_t step;
    std::size_t particle;
    std::string field;
};

/// d(rho_a)/dt = sum_b m_b (v_a - v_b) . grad_W_ab
inline double continuity_rate(std::span<const Particle> parts, const NeighborTable& table,
                              std::span<const Mat2> correction, std::size_t a,
                              bool corrected) {
    const Vec2 va = parts[a].v;
    double rate = 0.0;
    for (const NeighborEntry& n : table.neighbors_of(a)) {
        const Vec2 gw = detail::corrected(correction[a], n.grad_w, corrected);
        rate += parts[n.j].m * (va - parts[n.j].v).dot(gw);
    }
    return rate;
}

/// One explicit continuity step; density must stay positive.
inline double continuity_update(std::span<const Particle> parts, const NeighborTable& table,
                                std::span<const Mat2> correction, std::size_t a, double dt,
                                bool corrected, std::size_t step = 0) {
    const double rho = parts[a].rho + dt * continuity_rate(parts, table, correction, a, corrected);
    if (!(rho > 0.0) || !std::isfinite(rho))
        throw SimulationDiverged(step, a, "rho");
    return rho;
}

}  // namespace soilsph
