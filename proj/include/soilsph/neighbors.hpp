#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "soilsph/kernel.hpp"
#include "soilsph/particle.hpp"

namespace soilsph {

struct NeighborEntry {
    std::uint32_t j;  // neighbor index
    Vec2 r_ab;        // x_a - x_b
    double dist;      // |r_ab|
    Vec2 grad_w;      // raw kernel gradient with respect to a
};

/**
 * Fixed-radius neighbor lists with cached pair geometry.
 *
 * Lists are stored per particle (both directions of every pair) in CSR
 * layout, sorted by neighbor index so that summations are order-stable.
 * The listed radius may include a margin beyond the 2h support; pairs
 * beyond 2h simply carry a zero kernel gradient after refresh, which keeps
 * the lists valid while nothing has moved more than the margin.
 */
class NeighborTable {
public:
    std::span<const NeighborEntry> neighbors_of(std::size_t a) const {
        return {entries_.data() + offsets_[a], entries_.data() + offsets_[a + 1]};
    }

    std::size_t particle_count() const {
        return offsets_.empty() ? 0 : offsets_.size() - 1;
    }
    std::size_t pair_entry_count() const { return entries_.size(); }
    double listed_radius() const { return radius_; }

    /// True if any particle has moved more than `skin` since the last build.
    bool needs_rebuild(std::span<const Particle> parts, double skin) const {
        if (parts.size() != build_pos_.size()) return true;
        const double skin2 = skin * skin;
        for (std::size_t i = 0; i < parts.size(); ++i)
            if ((parts[i].x - build_pos_[i]).norm2() > skin2) return true;
        return false;
    }

    /// Recompute cached separations and kernel gradients from current
    /// positions, keeping the pair lists.
    void refresh_geometry(std::span<const Particle> parts, const CubicSplineKernel& kernel) {
        for (std::size_t a = 0; a + 1 < offsets_.size(); ++a) {
            const Vec2 xa = parts[a].x;
            for (std::uint32_t e = offsets_[a]; e < offsets_[a + 1]; ++e) {
                NeighborEntry& n = entries_[e];
                n.r_ab = xa - parts[n.j].x;
                n.dist = n.r_ab.norm();
                n.grad_w = kernel.grad_w(n.r_ab);
            }
        }
    }

    friend NeighborTable build_neighbors(std::span<const Particle>, double, double, double);

private:
    std::vector<std::uint32_t> offsets_;  // size N+1
    std::vector<NeighborEntry> entries_;
    std::vector<Vec2> build_pos_;
    double radius_ = 0.0;
};

/**
 * Exact fixed-radius search on a uniform grid.
 *
 * Pairs are listed when |x_a - x_b| <= 2h + margin (plus a 1e-9 m slack
 * against support-boundary flicker). With margin = 0 the pair set matches a
 * brute-force search at radius 2h.
 */
inline NeighborTable build_neighbors(std::span<const Particle> parts, double h,
                                     double cell_size, double margin = 0.0) {
    if (cell_size < 2.0 * h)
        throw std::invalid_argument("neighbor grid cell size must be at least 2h");

    const double radius = 2.0 * h + margin + 1e-9;
    const double cell = std::max(cell_size, radius);

    const auto cell_of = [cell](const Vec2& x) {
        const auto ix = static_cast<std::int64_t>(std::floor(x.x / cell));
        const auto iy = static_cast<std::int64_t>(std::floor(x.y / cell));
        return std::uint64_t(std::uint32_t(ix)) << 32 | std::uint32_t(iy);
    };

    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> grid;
    grid.reserve(parts.size());
    for (std::uint32_t i = 0; i < parts.size(); ++i)
        grid[cell_of(parts[i].x)].push_back(i);

    NeighborTable table;
    table.radius_ = radius;
    table.offsets_.resize(parts.size() + 1, 0);
    table.entries_.reserve(parts.size() * 16);
    table.build_pos_.resize(parts.size());

    const CubicSplineKernel kernel(h);
    const double r2 = radius * radius;
    std::vector<std::uint32_t> candidates;

    for (std::uint32_t a = 0; a < parts.size(); ++a) {
        table.build_pos_[a] = parts[a].x;
        candidates.clear();

        const auto ix = static_cast<std::int64_t>(std::floor(parts[a].x.x / cell));
        const auto iy = static_cast<std::int64_t>(std::floor(parts[a].x.y / cell));
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                const std::uint64_t key =
                    std::uint64_t(std::uint32_t(ix + dx)) << 32 | std::uint32_t(iy + dy);
                const auto it = grid.find(key);
                if (it == grid.end()) continue;
                for (std::uint32_t b : it->second) {
                    if (b == a) continue;
                    if ((parts[a].x - parts[b].x).norm2() <= r2) candidates.push_back(b);
                }
            }
        }
        std::sort(candidates.begin(), candidates.end());
        for (std::uint32_t b : candidates) {
            const Vec2 r_ab = parts[a].x - parts[b].x;
            table.entries_.push_back({b, r_ab, r_ab.norm(), kernel.grad_w(r_ab)});
        }
        table.offsets_[a + 1] = static_cast<std::uint32_t>(table.entries_.size());
    }
    return table;
}

}  // namespace soilsph
