#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "oracles.hpp"
#include "soilsph/kernel.hpp"
#include "soilsph/kernel_correction.hpp"
#include "soilsph/neighbors.hpp"
#include "soilsph/sph_operators.hpp"

using namespace soilsph;
using Catch::Approx;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("cubic spline values match the closed form", "[kernel]") {
    const CubicSplineKernel k(1.0);
    CHECK(k.w(0.0) == Approx(10.0 / (7.0 * kPi)).epsilon(1e-14));
    CHECK(k.w(0.0) == Approx(0.45473).margin(1e-5));
    CHECK(k.w(1.0) == Approx(10.0 / (7.0 * kPi) * 0.25).epsilon(1e-14));
    CHECK(k.w(1.0) == Approx(0.11368).margin(1e-5));
    CHECK(k.w(2.0) == 0.0);
    CHECK(k.w(3.5) == 0.0);

    // normalization scales as 1/h^2
    const CubicSplineKernel k2(0.24);
    CHECK(k2.normalization() == Approx(10.0 / (7.0 * kPi * 0.24 * 0.24)).epsilon(1e-14));
}

TEST_CASE("kernel rejects bad smoothing lengths", "[kernel]") {
    CHECK_THROWS_AS(CubicSplineKernel(0.0), std::invalid_argument);
    CHECK_THROWS_AS(CubicSplineKernel(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(CubicSplineKernel(std::nan("")), std::invalid_argument);
}

TEST_CASE("kernel is C1 at the piece joins", "[kernel]") {
    const CubicSplineKernel k(0.7);
    const double eps = 1e-9;
    for (double q : {1.0, 2.0}) {
        const double r = q * k.h();
        CHECK(k.w(r - eps) == Approx(k.w(r + eps)).margin(1e-7));
        CHECK(k.dw_dr(r - eps) == Approx(k.dw_dr(r + eps)).margin(1e-6));
    }
}

TEST_CASE("kernel gradient examples", "[kernel]") {
    const CubicSplineKernel k(1.0);
    CHECK(k.grad_w({0.0, 0.0}) == Vec2{});
    CHECK(k.grad_w({2.0, 0.0}) == Vec2{});

    const Vec2 g = k.grad_w({0.5, 0.0});
    const double expected = 10.0 / (7.0 * kPi) * (-3.0 * 0.5 + 2.25 * 0.25);
    CHECK(g.x == Approx(expected).epsilon(1e-14));
    CHECK(g.y == 0.0);
}

TEST_CASE("kernel gradient is antisymmetric", "[kernel]") {
    const CubicSplineKernel k(0.24);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int i = 0; i < 200; ++i) {
        const Vec2 r{u(rng), u(rng)};
        const Vec2 g = k.grad_w(r);
        const Vec2 gm = k.grad_w(-r);
        CHECK(gm.x == -g.x);
        CHECK(gm.y == -g.y);
    }
}

TEST_CASE("kernel quadrature sums to one on a lattice", "[kernel]") {
    const double dx = 0.2;
    const double h = 1.2 * dx;
    const CubicSplineKernel k(h);
    const auto parts = oracles::lattice(21, 21, dx, 2000.0);
    // center particle, full neighborhood
    const Vec2 c = parts[21 * 10 + 10].x;
    double sum = 0.0;
    for (const Particle& p : parts) sum += k.w((p.x - c).norm()) * p.m / p.rho;
    CHECK(sum == Approx(1.0).epsilon(0.01));
}

TEST_CASE("correction matrix approaches identity on a full lattice", "[kernel]") {
    const double dx = 0.1, h = 1.2 * dx;
    auto parts = oracles::lattice(15, 15, dx, 1800.0);
    const auto table = build_neighbors(parts, h, 2.0 * h);
    const std::size_t center = 15 * 7 + 7;
    const auto l = correction_matrix(parts, table, center);
    REQUIRE(l.has_value());
    CHECK(l->a11 == Approx(1.0).margin(1e-6));
    CHECK(l->a22 == Approx(1.0).margin(1e-6));
    CHECK(l->a12 == Approx(0.0).margin(1e-6));
    CHECK(l->a21 == Approx(0.0).margin(1e-6));
}

TEST_CASE("collinear neighborhoods are degenerate", "[kernel]") {
    const double dx = 0.1, h = 1.2 * dx;
    std::vector<Particle> parts;
    for (int i = 0; i < 7; ++i) {
        Particle p;
        p.x = {i * dx, 0.0};
        p.rho = p.rho0 = 1000.0;
        p.m = 1000.0 * dx * dx;
        parts.push_back(p);
    }
    const auto table = build_neighbors(parts, h, 2.0 * h);
    CHECK_FALSE(correction_matrix(parts, table, 3).has_value());

    // fewer than 3 neighbors
    std::vector<Particle> pair(parts.begin(), parts.begin() + 2);
    const auto t2 = build_neighbors(pair, h, 2.0 * h);
    CHECK_FALSE(correction_matrix(pair, t2, 0).has_value());
}

TEST_CASE("corrected gradients differentiate linear fields exactly", "[kernel]") {
    const double dx = 0.1, h = 1.2 * dx;
    const double c0 = 3.0, c1 = -1.7, c2 = 0.4;

    SECTION("lattice including edges and corners") {
        auto parts = oracles::lattice(12, 9, dx, 2000.0);
        const auto table = build_neighbors(parts, h, 2.0 * h);
        const auto corr = compute_corrections(parts, table, parts.size());
        REQUIRE(corr.degenerate == 0);
        std::vector<double> field;
        for (const Particle& p : parts) field.push_back(c0 + c1 * p.x.x + c2 * p.x.y);
        for (std::size_t a = 0; a < parts.size(); ++a) {
            const Vec2 g = sph_gradient(field, parts, table, corr.l, a,
                                        GradientForm::difference, true);
            CHECK(g.x == Approx(c1).epsilon(1e-10));
            CHECK(g.y == Approx(c2).epsilon(1e-10));
        }
    }

    SECTION("irregular cloud") {
        auto parts = oracles::random_cloud(120, 1.0, 0.8, 0.55 * dx, 2000.0, 42);
        const auto table = build_neighbors(parts, h, 2.0 * h);
        const auto corr = compute_corrections(parts, table, parts.size());
        std::vector<double> field;
        for (const Particle& p : parts) field.push_back(c0 + c1 * p.x.x + c2 * p.x.y);
        std::size_t checked = 0;
        for (std::size_t a = 0; a < parts.size(); ++a) {
            if (!correction_matrix(parts, table, a)) continue;  // skip degenerate
            const Vec2 g = sph_gradient(field, parts, table, corr.l, a,
                                        GradientForm::difference, true);
            CHECK(g.x == Approx(c1).epsilon(1e-10));
            CHECK(g.y == Approx(c2).epsilon(1e-10));
            ++checked;
        }
        CHECK(checked > 100);
    }
}

TEST_CASE("free-surface particle keeps exact linear gradients", "[kernel]") {
    // straight free surface: top row of a half plane
    const double dx = 0.1, h = 1.2 * dx;
    auto parts = oracles::lattice(20, 8, dx, 2000.0);
    const auto table = build_neighbors(parts, h, 2.0 * h);
    const auto corr = compute_corrections(parts, table, parts.size());
    std::vector<double> field;
    for (const Particle& p : parts) field.push_back(p.x.x);  // f = x

    // a particle on the top row, away from the corners
    std::size_t a = 0;
    for (std::size_t i = 0; i < parts.size(); ++i)
        if (parts[i].x.y > 0.7 && std::abs(parts[i].x.x - 1.0) < 0.5 * dx) a = i;
    const Vec2 g = sph_gradient(field, parts, table, corr.l, a, GradientForm::difference, true);
    CHECK(g.x == Approx(1.0).epsilon(1e-10));
    CHECK(g.y == Approx(0.0).margin(1e-10));
}
