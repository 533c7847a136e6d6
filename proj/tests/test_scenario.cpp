#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "soilsph/scenario.hpp"

using namespace soilsph;
using Catch::Approx;

namespace {

ScenarioConfig foundation_cfg() {
    ScenarioConfig cfg;
    cfg.name = "foundation";
    cfg.geometry = {GeometryKind::rectangle, 25.0, 6.0, {}};
    cfg.spacing = 0.2;
    cfg.water_level = 8.0;
    cfg.material = {15e6, 0.33, 20000.0, 18600.0, 9810.0};
    return cfg;
}

}  // namespace

TEST_CASE("lattice particle counts", "[scenario]") {
    SECTION("paper-scale foundation") {
        const auto parts = build_lattice(foundation_cfg());
        CHECK(parts.size() == 3750);  // 125 x 30
    }
    SECTION("tiny square") {
        ScenarioConfig cfg = foundation_cfg();
        cfg.geometry = {GeometryKind::rectangle, 1.0, 1.0, {}};
        cfg.spacing = 0.5;
        CHECK(build_lattice(cfg).size() == 4);
    }
    SECTION("empty geometry is an error") {
        ScenarioConfig cfg = foundation_cfg();
        cfg.geometry = {GeometryKind::polygon, 0, 0, {{0, 0}, {1, 0}}};
        CHECK_THROWS_AS(build_lattice(cfg), std::invalid_argument);
        cfg.geometry = {GeometryKind::rectangle, 0.0, 0.0, {}};
        CHECK_THROWS_AS(build_lattice(cfg), std::invalid_argument);
    }
}

TEST_CASE("lattice density and mass follow the water level", "[scenario]") {
    ScenarioConfig cfg = foundation_cfg();
    cfg.water_level = 3.0;  // half submerged
    const auto parts = build_lattice(cfg);
    for (const Particle& p : parts) {
        const double want = p.x.y <= 3.0 ? 20000.0 / 9.81 : 18600.0 / 9.81;
        CHECK(p.rho0 == Approx(want).epsilon(1e-12));
        CHECK(p.rho == p.rho0);
        CHECK(p.m == Approx(want * 0.04).epsilon(1e-12));
    }
}

TEST_CASE("pore pressure assignment", "[scenario]") {
    ScenarioConfig cfg = foundation_cfg();
    auto parts = build_lattice(cfg);
    assign_pore_pressure(parts, 8.0, 9810.0);
    for (const Particle& p : parts) {
        CHECK(p.p_w == Approx(-9810.0 * (8.0 - p.x.y)).epsilon(1e-12));
        CHECK(p.p_w <= 0.0);
    }

    CHECK(hydrostatic_pw(8.0, 8.0, 9810.0) == 0.0);
    CHECK(hydrostatic_pw(5.0, 8.0, 9810.0) == Approx(-29430.0).epsilon(1e-12));
    CHECK(hydrostatic_pw(9.0, 8.0, 9810.0) == 0.0);
}

TEST_CASE("layered column solution", "[scenario]") {
    const MaterialParams m{15e6, 0.25, 20000.0, 18600.0, 9810.0};

    SECTION("fully submerged") {
        CHECK(analytic_sigma_v_eff(6.0, 6.0, 8.0, m) == 0.0);
        CHECK(analytic_sigma_v_eff(6.0, 3.0, 8.0, m) ==
              Approx(-(20000.0 - 9810.0) * 3.0).epsilon(1e-12));
    }
    SECTION("water table inside the column") {
        // 2 m moist above the table, 3 m buoyant below
        const double got = analytic_sigma_v_eff(11.0, 6.0, 9.0, m);
        CHECK(got == Approx(-(18600.0 * 2.0 + (20000.0 - 9810.0) * 3.0)).epsilon(1e-12));
    }
    SECTION("dry column") {
        CHECK(analytic_sigma_v_eff(6.0, 2.0, -1.0, m) == Approx(-18600.0 * 4.0).epsilon(1e-12));
    }
    SECTION("total composes with the pore pressure") {
        CHECK(analytic_sigma_v_total(6.0, 3.0, 8.0, m) ==
              Approx(-(20000.0 - 9810.0) * 3.0 - 9810.0 * 5.0).epsilon(1e-12));
    }
}

TEST_CASE("K0 initialization", "[scenario]") {
    ScenarioConfig cfg = foundation_cfg();
    auto parts = build_lattice(cfg);
    const SurfaceProfile surf = surface_profile(parts, 0.0, 25.0, cfg.spacing);
    CHECK(surf.elevation(12.5) == Approx(6.0).epsilon(1e-12));

    k0_initialize(parts, surf, cfg.water_level, cfg.material, 30.0, 0.51 * cfg.spacing);
    const double k0 = 1.0 - std::sin(30.0 * std::numbers::pi / 180.0);
    CHECK(k0 == Approx(0.5).epsilon(1e-12));

    for (const Particle& p : parts) {
        const double depth = 6.0 - p.x.y;
        const double sv = -(20000.0 - 9810.0) * depth;
        CHECK(p.sigma_eff.yy == Approx(sv).epsilon(1e-12));
        CHECK(p.sigma_eff.xx == Approx(k0 * sv).epsilon(1e-12));
        CHECK(p.sigma_eff.zz == Approx(k0 * sv).epsilon(1e-12));
        CHECK(p.sigma_eff.xy == 0.0);
    }

    // 3 m deep target value
    CHECK(analytic_sigma_v_eff(6.0, 3.0, 8.0, cfg.material) ==
          Approx(-30570.0).epsilon(1e-12));
}

TEST_CASE("K0 refuses non-horizontal surfaces", "[scenario]") {
    ScenarioConfig cfg = foundation_cfg();
    cfg.geometry = {GeometryKind::polygon,
                    0,
                    0,
                    {{0.0, 0.0}, {10.0, 0.0}, {10.0, 2.0}, {5.0, 6.0}, {0.0, 2.0}}};
    auto parts = build_lattice(cfg);
    const SurfaceProfile surf = surface_profile(parts, 0.0, 10.0, cfg.spacing);
    CHECK_FALSE(surf.horizontal(0.51 * cfg.spacing));
    CHECK_THROWS_AS(
        k0_initialize(parts, surf, 8.0, cfg.material, 30.0, 0.51 * cfg.spacing),
        UnsupportedGeometry);
}

TEST_CASE("scenario assembly", "[scenario]") {
    ScenarioConfig cfg = foundation_cfg();
    const ScenarioState st = build_scenario(cfg);

    CHECK(st.soil.size() == 3750);
    CHECK(st.walls.left == WallCondition::free_roller);
    CHECK(st.walls.bottom == WallCondition::full_fixity);
    CHECK(st.walls.band == Approx(0.48).epsilon(1e-12));

    // 3 rows spanning the width extended one band both sides
    const long cols = std::lround((25.0 + 2 * 0.48) / 0.2);
    CHECK(st.virtuals.size() == static_cast<std::size_t>(3 * cols));
    for (const Particle& p : st.virtuals) {
        CHECK(p.kind == ParticleKind::virtual_boundary);
        CHECK(p.p_w == Approx(-9810.0 * (8.0 - p.x.y)).epsilon(1e-12));
    }

    // soil pore pressures assigned
    for (const Particle& p : st.soil) CHECK(p.p_w < 0.0);
}

TEST_CASE("velocity perturbation is reproducible by seed", "[scenario]") {
    ScenarioConfig cfg = foundation_cfg();
    cfg.geometry = {GeometryKind::rectangle, 2.0, 2.0, {}};
    cfg.numerics.perturb_v = 0.01;
    cfg.numerics.seed = 1234;

    const ScenarioState a = build_scenario(cfg);
    const ScenarioState b = build_scenario(cfg);
    cfg.numerics.seed = 77;
    const ScenarioState c = build_scenario(cfg);

    bool any_nonzero = false, differs = false;
    for (std::size_t i = 0; i < a.soil.size(); ++i) {
        CHECK(a.soil[i].v == b.soil[i].v);
        if (a.soil[i].v.norm2() > 0.0) any_nonzero = true;
        if (!(a.soil[i].v == c.soil[i].v)) differs = true;
        CHECK(std::abs(a.soil[i].v.x) <= 0.01);
        CHECK(std::abs(a.soil[i].v.y) <= 0.01);
    }
    CHECK(any_nonzero);
    CHECK(differs);
}
