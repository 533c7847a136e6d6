#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "soilsph/neighbors.hpp"

namespace soilsph {

constexpr double kCorrectionConditionLimit = 1e8;
constexpr std::size_t kCorrectionMinNeighbors = 3;

/**
 * Kernel-gradient correction matrix for particle a:
 *
 *   L_a = ( sum_b (m_b / rho_b) grad_W_ab (x) (x_b - x_a) )^-1
 *
 * Multiplying raw kernel gradients by L_a makes SPH difference-form
 * gradients of linear fields exact, which repairs the truncated-support
 * deficiency near free surfaces. Returns nullopt when the neighborhood is
 * degenerate (fewer than 3 neighbors, or the moment matrix has condition
 * number above kCorrectionConditionLimit); callers fall back to identity.
 */
inline std::optional<Mat2> correction_matrix(std::span<const Particle> parts,
                                             const NeighborTable& table, std::size_t a) {
    const auto nbrs = table.neighbors_of(a);
    if (nbrs.size() < kCorrectionMinNeighbors) return std::nullopt;

    Mat2 moment;
    for (const NeighborEntry& n : nbrs) {
        const Particle& b = parts[n.j];
        const double vol = b.m / b.rho;
        // x_b - x_a = -r_ab
        moment.a11 += vol * n.grad_w.x * -n.r_ab.x;
        moment.a12 += vol * n.grad_w.x * -n.r_ab.y;
        moment.a21 += vol * n.grad_w.y * -n.r_ab.x;
        moment.a22 += vol * n.grad_w.y * -n.r_ab.y;
    }

    const double det = moment.det();
    if (!moment.finite() || det == 0.0 ||
        condition_number(moment) > kCorrectionConditionLimit)
        return std::nullopt;

    const Mat2 l = inverse(moment, det);
    if (!l.finite()) return std::nullopt;
    return l;
}

struct CorrectionField {
    std::vector<Mat2> l;            // per particle; identity where degenerate
    std::size_t degenerate = 0;     // count of identity fallbacks
};

/// Correction matrices for particles [0, count); the rest get identity.
inline CorrectionField compute_corrections(std::span<const Particle> parts,
                                           const NeighborTable& table, std::size_t count) {
    CorrectionField field;
    field.l.assign(parts.size(), Mat2::identity());
    for (std::size_t a = 0; a < count; ++a) {
        if (auto l = correction_matrix(parts, table, a))
            field.l[a] = *l;
        else
            ++field.degenerate;
    }
    return field;
}

}  // namespace soilsph
