#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "soilsph/constitutive.hpp"

using namespace soilsph;
using Catch::Approx;

namespace {

MaterialParams test_soil() {
    return {15e6, 0.33, 20000.0, 18600.0, 9810.0};
}

Sym2 random_sym(std::mt19937& rng, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    return {u(rng), u(rng), u(rng), u(rng)};
}

}  // namespace

TEST_CASE("derived moduli", "[constitutive]") {
    const MaterialParams m = test_soil();
    CHECK(m.shear_modulus() == Approx(15e6 / 2.66).epsilon(1e-12));
    CHECK(m.bulk_modulus() == Approx(15e6 / (3.0 * 0.34)).epsilon(1e-12));
    CHECK(m.rho_sat() == Approx(20000.0 / 9.81).epsilon(1e-12));

    CHECK_THROWS_AS((MaterialParams{-1.0, 0.3, 1, 1, 1}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((MaterialParams{1e6, 0.5, 1, 1, 1}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((MaterialParams{1e6, -1.0, 1, 1, 1}.validate()), std::invalid_argument);
    CHECK_NOTHROW(test_soil().validate());
}

TEST_CASE("zero rates give zero stress rate", "[constitutive]") {
    const Sym2 sigma{-1e4, -2e4, -1.5e4, 3e3};
    const Sym2 rate = stress_rate(sigma, {}, 0.0, test_soil());
    CHECK(rate.xx == 0.0);
    CHECK(rate.yy == 0.0);
    CHECK(rate.zz == 0.0);
    CHECK(rate.xy == 0.0);
}

TEST_CASE("stress rate matches the 6x6 Hooke oracle", "[constitutive]") {
    const MaterialParams m = test_soil();

    SECTION("in-plane hydrostatic strain rate") {
        const double s = 1e-3;
        const Sym2 eps{s, s, 0.0, 0.0};
        const Sym2 got = stress_rate({}, eps, 0.0, m);
        const Sym2 want = oracles::hooke_stress_rate(eps, m);
        CHECK(got.xx == Approx(want.xx).epsilon(1e-12));
        CHECK(got.yy == Approx(want.yy).epsilon(1e-12));
        CHECK(got.zz == Approx(want.zz).epsilon(1e-12));
        CHECK(got.xy == Approx(want.xy).margin(1e-12));
    }

    SECTION("random strain rates") {
        std::mt19937 rng(23);
        for (int i = 0; i < 50; ++i) {
            Sym2 eps = random_sym(rng, 1e-2);
            eps.zz = 0.0;  // plane strain
            const Sym2 got = stress_rate({}, eps, 0.0, m);
            const Sym2 want = oracles::hooke_stress_rate(eps, m);
            CHECK(got.xx == Approx(want.xx).epsilon(1e-12));
            CHECK(got.yy == Approx(want.yy).epsilon(1e-12));
            CHECK(got.zz == Approx(want.zz).epsilon(1e-12));
            CHECK(got.xy == Approx(want.xy).epsilon(1e-12));
        }
    }
}

TEST_CASE("compliance and stiffness round trip", "[constitutive]") {
    const MaterialParams m = test_soil();
    const double g2 = 2.0 * m.shear_modulus();
    std::mt19937 rng(31);
    for (int i = 0; i < 50; ++i) {
        const Sym2 sig_dot = random_sym(rng, 1e5);
        // strain rate from the compliance split: deviator over 2G plus
        // (1 - 2 nu)/(3E) tr(sigma_dot) on the diagonal
        const double tr = sig_dot.trace();
        const double vol = (1.0 - 2.0 * m.nu) / (3.0 * m.E) * tr;
        const Sym2 eps{(sig_dot.xx - tr / 3.0) / g2 + vol,
                       (sig_dot.yy - tr / 3.0) / g2 + vol,
                       (sig_dot.zz - tr / 3.0) / g2 + vol,
                       sig_dot.xy / g2};
        const Sym2 back = stress_rate({}, eps, 0.0, m);
        CHECK(back.xx == Approx(sig_dot.xx).epsilon(1e-10));
        CHECK(back.yy == Approx(sig_dot.yy).epsilon(1e-10));
        CHECK(back.zz == Approx(sig_dot.zz).epsilon(1e-10));
        CHECK(back.xy == Approx(sig_dot.xy).epsilon(1e-10));
    }
}

namespace {

// RK4 on the pure-spin stress rate; the invariant conservation being tested
// is a property of the rate function, so integrate it accurately.
Sym2 integrate_spin(Sym2 sigma, double spin_xy, const MaterialParams& m, double dt,
                    std::size_t steps) {
    for (std::size_t i = 0; i < steps; ++i) {
        const Sym2 k1 = stress_rate(sigma, {}, spin_xy, m);
        const Sym2 k2 = stress_rate(sigma + 0.5 * dt * k1, {}, spin_xy, m);
        const Sym2 k3 = stress_rate(sigma + 0.5 * dt * k2, {}, spin_xy, m);
        const Sym2 k4 = stress_rate(sigma + dt * k3, {}, spin_xy, m);
        sigma += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return sigma;
}

}  // namespace

TEST_CASE("pure spin preserves stress invariants", "[constitutive]") {
    const MaterialParams m = test_soil();
    const double omega = 2.0;            // material rotation rate
    const double spin_xy = -omega;       // tensor convention: w_xy = -omega
    const Sym2 sigma0{-1000.0, 0.0, 0.0, 0.0};

    const double revolution = 2.0 * std::numbers::pi / omega;
    const double dt = 1e-4 * revolution;
    const auto steps = static_cast<std::size_t>(std::llround(revolution / dt));
    const Sym2 sigma = integrate_spin(sigma0, spin_xy, m, dt, steps);

    CHECK(sigma.trace() == Approx(sigma0.trace()).margin(1e-9));
    CHECK(sigma.j2() == Approx(sigma0.j2()).epsilon(1e-6));

    // quarter turn against the closed-form rotation
    const auto quarter = steps / 4;
    const Sym2 q = integrate_spin(sigma0, spin_xy, m, dt, quarter);
    const Sym2 want = oracles::rotate_stress(sigma0, omega * quarter * dt);
    CHECK(q.xx == Approx(want.xx).margin(1e-6));
    CHECK(q.yy == Approx(want.yy).margin(1e-6));
    CHECK(q.xy == Approx(want.xy).margin(1e-6));
}

TEST_CASE("sound speed", "[constitutive]") {
    MaterialParams m;
    m.E = 8.0;  // G = 4 at nu = 0
    m.nu = 0.0;
    m.gamma_sat = m.gamma_unsat = m.gamma_w = 1.0;
    CHECK(sound_speed(m, 1.0) == Approx(2.0).epsilon(1e-14));

    const MaterialParams soil = test_soil();
    CHECK(sound_speed(soil, soil.rho_sat()) == Approx(52.6).epsilon(0.002));

    CHECK(sound_speed(m, 2.0) == Approx(2.0 / std::sqrt(2.0)).epsilon(1e-14));
}
