#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mattersim/analytic.hpp"
#include "mattersim/bloch.hpp"
#include "oracles.hpp"

using namespace mattersim;

namespace {
constexpr double pi = std::numbers::pi;

// reference values, independently computed to 12+ digits
struct BesselRef {
    int n;
    double x;
    double value;
};
constexpr BesselRef bessel_table[] = {
    {0, 0.2, 0.990024972239576},  {1, 0.2, 0.099500832639236},
    {2, 0.2, 0.004983354152784},  {3, 0.2, 0.000166250416435},
    {0, 1.17, 0.685964625798159}, {1, 1.17, 0.490448614448455},
    {2, 1.17, 0.152409074113730}, {3, 1.17, 0.030608049188229},
    {0, 1.13, 0.705365325811424}, {1, 1.21, 0.500829672640612},
    {0, 0.3, 0.977626246538296},  {2, 0.3, 0.011165861949064},
    {0, 64.0, 0.092590012216050},
};
}  // namespace

TEST_CASE("bessel_j against reference values") {
    for (const auto& ref : bessel_table) {
        CHECK(std::abs(bessel_j(ref.n, ref.x) - ref.value) < 1e-10);
    }
    CHECK(bessel_j(0, 0.0) == 1.0);
    CHECK(bessel_j(1, 0.0) == 0.0);
    CHECK(bessel_j(7, 0.0) == 0.0);
    CHECK(std::abs(bessel_j(3, 1e-9) - (1e-9 / 2) * (1e-9 / 2) * (1e-9 / 2) / 6.0) < 1e-30);

    // splitter tuning targets: 50% / 25% populations
    CHECK(std::abs(bessel_j(0, 1.13) * bessel_j(0, 1.13) - 0.50) < 0.005);
    CHECK(std::abs(bessel_j(1, 1.21) * bessel_j(1, 1.21) - 0.25) < 0.005);

    CHECK_THROWS_AS(bessel_j(-1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(bessel_j(65, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(bessel_j(0, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(bessel_j(0, 64.5), std::invalid_argument);
}

TEST_CASE("bessel normalization identity") {
    for (double gamma = 0.0; gamma <= 10.0; gamma += 0.25) {
        double sum = bessel_j(0, gamma) * bessel_j(0, gamma);
        for (int n = 1; n <= 40; ++n) {
            const double j = bessel_j(n, gamma);
            sum += 2.0 * j * j;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("raman-nath state") {
    const auto vacuum = raman_nath_state(0.0, 0);
    CHECK(vacuum.population(0) == 1.0);

    double deficit = -1.0;
    const auto state = raman_nath_state(1.17, raman_nath_min_span(1.17), &deficit);
    CHECK(deficit >= 0.0);
    CHECK(deficit <= 1e-10);
    CHECK(state.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(state.population(0) - 0.470547) < 1e-5);
    CHECK(std::abs(state.population(0) - 0.5) < 0.03);    // near the 50% target
    CHECK(std::abs(state.population(1) - 0.25) < 0.011);  // near the 25% target
    CHECK(state.population(1) == doctest::Approx(state.population(-1)).epsilon(1e-14));

    // phases are powers of -i
    CHECK(std::arg(state.amplitude(1)) == doctest::Approx(-pi / 2).epsilon(1e-14));
    CHECK(std::arg(state.amplitude(-1)) == doctest::Approx(-pi / 2).epsilon(1e-14));
    CHECK(std::abs(std::arg(state.amplitude(2))) == doctest::Approx(pi).epsilon(1e-14));
    CHECK(std::arg(state.amplitude(3)) == doctest::Approx(pi / 2).epsilon(1e-14));

    CHECK_THROWS_AS(raman_nath_state(5.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(raman_nath_state(-0.1, 4), std::invalid_argument);
}

TEST_CASE("raman-nath validity bound") {
    CHECK(std::abs(raman_nath_validity_bound(3.7) - 0.129969) < 1e-6);
    CHECK(std::abs(raman_nath_validity_bound(3.7) - 0.13) < 0.001);
    CHECK(raman_nath_validity_bound(25.0) == doctest::Approx(0.05).epsilon(1e-14));
    CHECK(raman_nath_validity_bound(1.0 / 16.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(raman_nath_validity_bound(0.0), std::invalid_argument);
}

TEST_CASE("rabi phase closed forms") {
    const double dt = 2.0 * pi / 0.09;  // makes a rect pi pulse at q = 0.3
    const auto rect = PulseEnvelope::rectangular(0.3, 0.0, dt);
    CHECK(rabi_phase(rect) == doctest::Approx(pi).epsilon(1e-14));

    const double q_gauss = std::sqrt(2.0 * std::sqrt(pi) / (0.6 * std::erf(5.0)));
    const auto gauss = PulseEnvelope::gaussian(q_gauss, 0.0, 0.6);
    CHECK(std::abs(rabi_phase(gauss) - pi) < 1e-12);

    const auto nothing = PulseEnvelope::rectangular(0.0, 0.0, 1.0);
    CHECK(rabi_phase(nothing) == 0.0);
}

TEST_CASE("rabi phase quadrature agrees with the closed forms") {
    const auto rect = PulseEnvelope::rectangular(1.3, 0.2, 4.7);
    CHECK(std::abs(rabi_phase_quadrature(rect) - rabi_phase(rect)) <= 1e-9);

    const auto gauss = PulseEnvelope::gaussian(2.43, 10.0, 0.6);
    CHECK(std::abs(rabi_phase_quadrature(gauss) - rabi_phase(gauss)) <= 1e-9);

    const auto tab = PulseEnvelope::tabulated({{0.0, 0.0}, {1.0, 1.5}, {2.5, 0.75}, {4.0, 0.0}});
    CHECK(std::abs(rabi_phase_quadrature(tab) - rabi_phase(tab)) <= 1e-9);
}

TEST_CASE("effective two-level model") {
    const auto zero = effective_two_level(0.0);
    CHECK(zero.diagonal == 4.0);
    CHECK(zero.coupling == 0.0);
    CHECK(zero.ground_shift == 0.0);
    CHECK_FALSE(zero.beyond_validity);

    const auto m = effective_two_level(0.3);
    CHECK(m.diagonal == doctest::Approx(4.015).epsilon(1e-14));
    CHECK(m.coupling == doctest::Approx(0.0225).epsilon(1e-14));
    CHECK(m.ground_shift == doctest::Approx(-0.045).epsilon(1e-14));

    // at q = 1 the exact splitting differs from 2 * coupling by about 10%
    const auto strong = effective_two_level(1.0);
    CHECK(strong.coupling == doctest::Approx(0.25).epsilon(1e-14));
    const auto sys = eigensystem(build_hamiltonian(0.0, 1.0, 12));
    const double splitting = sys.values[2] - sys.values[1];
    const double rel = std::abs(splitting - 2.0 * strong.coupling) / (2.0 * strong.coupling);
    CHECK(std::abs(rel - 0.091448) < 1e-5);
    CHECK(rel > 0.07);
    CHECK(rel < 0.12);

    CHECK_FALSE(effective_two_level(0.9).beyond_validity);
    CHECK(effective_two_level(1.5).beyond_validity);
}

TEST_CASE("bragg_apply: pi-pulse diffraction phases") {
    const double q = 0.2;
    const double dt = 2.0 * pi / (q * q);
    const auto pulse = PulseEnvelope::rectangular(q, 0.0, dt);
    REQUIRE(rabi_phase(pulse) == doctest::Approx(pi).epsilon(1e-14));

    // |0> picks up exactly e^{i pi}
    const auto from0 = bragg_apply(PlaneWaveState::basis_state(0.0, 0), pulse);
    CHECK(from0.population(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(std::arg(from0.amplitude(0))) == doctest::Approx(pi).epsilon(1e-12));

    // |+2> swaps to |-2> with the free phase and the -5 pi/6 diffraction phase
    const auto from2 = bragg_apply(PlaneWaveState::basis_state(0.0, 1), pulse);
    CHECK(from2.population(-1) == doctest::Approx(1.0).epsilon(1e-14));
    const double dev = std::remainder(std::arg(from2.amplitude(-1)) + 4.0 * dt + 5.0 * pi / 6.0,
                                      2.0 * pi);
    CHECK(std::abs(dev) < 1e-10);

    // an empty pulse is the identity
    const auto idle = PulseEnvelope::rectangular(0.0, 0.0, 0.0);
    const auto same = bragg_apply(PlaneWaveState::basis_state(0.0, 1), idle);
    CHECK(std::abs(same.amplitude(1) - std::complex<double>(1.0, 0.0)) < 1e-15);

    // population outside the three-state manifold is rejected
    auto wide = raman_nath_state(1.17, raman_nath_min_span(1.17));
    CHECK_THROWS_AS(bragg_apply(wide, pulse), std::invalid_argument);
}

TEST_CASE("bragg_apply is unitary and composes additively") {
    oracles::Lcg rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        const double q = rng.uniform(0.05, 0.5);
        const double dt1 = rng.uniform(0.5, 30.0);
        const double dt2 = rng.uniform(0.5, 30.0);
        const auto p1 = PulseEnvelope::rectangular(q, 0.0, dt1);
        const auto p2 = PulseEnvelope::rectangular(q, dt1, dt1 + dt2);
        const auto joined = PulseEnvelope::rectangular(q, 0.0, dt1 + dt2);

        auto state = PlaneWaveState::from_amplitudes(
            0.0, -1,
            {{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)},
             {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)},
             {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}});

        const auto once = bragg_apply(state, joined);
        CHECK(once.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));

        const auto twice = bragg_apply(bragg_apply(state, p1), p2);
        for (int p = -1; p <= 1; ++p) {
            CHECK(std::abs(once.amplitude(p) - twice.amplitude(p)) <= 1e-10);
        }
    }
}

TEST_CASE("bragg_apply: symmetric input gains a pure phase, slope -5/6") {
    const std::complex<double> r(1.0 / std::sqrt(2.0), 0.0);
    const auto sym = PlaneWaveState::from_amplitudes(0.0, -1, {r, {0.0, 0.0}, r});
    for (double phi_r : {0.4, 1.1, pi, 2.4}) {
        const double dt = 2.0 * phi_r / 0.09;  // rect q = 0.3
        const auto pulse = PulseEnvelope::rectangular(0.3, 0.0, dt);
        REQUIRE(rabi_phase(pulse) == doctest::Approx(phi_r).epsilon(1e-13));
        const auto out = bragg_apply(sym, pulse);
        const std::complex<double> expected =
            std::exp(std::complex<double>(0.0, -(4.0 * dt + 5.0 * phi_r / 6.0)));
        for (int p : {-1, 1}) {
            CHECK(std::abs(out.amplitude(p) - expected * sym.amplitude(p)) <= 1e-12);
        }
    }
}

TEST_CASE("pi pulse design") {
    const double q_gauss = design_pi_pulse(PulseShape::Gaussian, 0.6);
    CHECK(q_gauss > 2.42);
    CHECK(q_gauss < 2.44);
    CHECK(std::abs(q_gauss - 2.4306747012) < 1e-9);
    CHECK(std::abs(rabi_phase(PulseEnvelope::gaussian(q_gauss, 0.0, 0.6)) - pi) < 1e-9);

    const double q_rect = design_pi_pulse(PulseShape::Rectangular, 2.0 * pi / 0.09);
    CHECK(std::abs(q_rect - 0.3) < 1e-12);
    CHECK(std::abs(design_pi_pulse(PulseShape::Rectangular, 2.0 * pi) - 1.0) < 1e-12);

    // tabulated: bisection on an overall scale factor
    const auto tri = PulseEnvelope::tabulated({{0.0, 0.0}, {1.0, 1.0}, {2.0, 0.0}});
    const double peak = design_pi_pulse(tri);
    const auto scaled = tri.scaled(peak / tri.q_max);
    CHECK(std::abs(rabi_phase(scaled) - pi) < 1e-9);

    CHECK_THROWS_AS(design_pi_pulse(PulseShape::Rectangular, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(design_pi_pulse(PulseShape::Tabulated, 1.0), std::invalid_argument);
}
