#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ngrc/models.hpp"

#include <cmath>
#include <random>

using namespace ngrc;

namespace {

// Literal transcription of the printed power system equations, kept separate
// from the production code path on purpose.
StateVector reference_power_deriv(const StateVector& x, const PowerSystemParams& p) {
    const double ratio = p.C / p.Y0;
    const double f = std::sqrt(1.0 + ratio * ratio - 2.0 * ratio * std::cos(p.theta0));
    const double E0p = p.E0 / f;
    const double Y0p = p.Y0 * f;
    const double dm = x[0], w = x[1], d = x[2], V = x[3];
    const double P = -E0p * Y0p * V * std::sin(d) + p.Em * p.Ym * V * std::sin(dm - d);
    const double Q = E0p * Y0p * V * std::cos(d) - (Y0p + p.Ym) * V * V +
                     p.Em * p.Ym * V * std::cos(dm - d);
    return {w,
            (-p.dm * w + p.Pm - p.Em * p.Ym * std::sin(dm - d) * V) / p.M,
            (-p.K_qv2 * V * V - p.K_qv * V + Q - p.Q0 - p.Q1) / p.K_qw,
            (p.K_pw * p.K_qv2 * V * V + (p.K_pw * p.K_qv - p.K_qw * p.K_pv) * V +
             p.K_qw * (P - p.P0 - p.P1) - p.K_pw * (Q - p.Q0 - p.Q1)) /
                (p.T_load * p.K_qw * p.K_pv)};
}

StateVector reference_food_deriv(const StateVector& x, const FoodChainParams& p) {
    const double R = x[0], C = x[1], P = x[2];
    return {R * (1.0 - R / p.K) - p.x_c * p.y_c * C * R / (R + p.R0),
            p.x_c * C * (p.y_c * R / (R + p.R0) - 1.0) - p.x_p * p.y_p * P * C / (C + p.C0),
            p.x_p * P * (p.y_p * C / (C + p.C0) - 1.0)};
}

OdeModel scalar_model(double rate) {
    OdeModel m;
    m.dim = 1;
    m.deriv = [rate](std::span<const double> x, std::span<double> out) {
        out[0] = rate * x[0];
    };
    return m;
}

}  // namespace

TEST_CASE("rk4 zero field keeps the state") {
    OdeModel zero;
    zero.dim = 2;
    zero.deriv = [](std::span<const double>, std::span<double> out) {
        out[0] = 0.0;
        out[1] = 0.0;
    };
    const StateVector next = rk4_step(zero, {1.0, 2.0}, 0.1);
    CHECK(next[0] == 1.0);
    CHECK(next[1] == 2.0);
}

TEST_CASE("rk4 matches the exponential to O(dt^5)") {
    const StateVector up = rk4_step(scalar_model(1.0), {1.0}, 0.1);
    CHECK(std::abs(up[0] - std::exp(0.1)) < 1e-7);

    const StateVector down = rk4_step(scalar_model(-1.0), {1.0}, 0.05);
    CHECK(std::abs(down[0] - std::exp(-0.05)) < 1e-8);
}

TEST_CASE("rk4 global error shrinks ~16x when dt halves") {
    const auto global_error = [](double dt) {
        StateVector x{1.0};
        const std::size_t steps = static_cast<std::size_t>(std::lround(1.0 / dt));
        const OdeModel m = scalar_model(-1.0);
        for (std::size_t i = 0; i < steps; ++i) x = rk4_step(m, x, dt);
        return std::abs(x[0] - std::exp(-1.0));
    };
    const double ratio = global_error(0.02) / global_error(0.01);
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
}

TEST_CASE("derived constants collapse to identity at C = 0") {
    PowerSystemParams p;
    p.C = 0.0;
    const DerivedPowerConstants dc = derived_constants(p);
    CHECK(dc.E0_prime == doctest::Approx(p.E0).epsilon(1e-15));
    CHECK(dc.Y0_prime == doctest::Approx(p.Y0).epsilon(1e-15));
    CHECK(dc.theta0_prime == 0.0);
}

TEST_CASE("derived constants at defaults") {
    const PowerSystemParams p;
    const DerivedPowerConstants dc = derived_constants(p);
    // theta0 = 0 makes the factor |1 - C/Y0| and the angle exactly zero
    const double factor = std::abs(1.0 - p.C / p.Y0);
    CHECK(dc.theta0_prime == 0.0);
    CHECK(dc.E0_prime == doctest::Approx(p.E0 / factor).epsilon(1e-12));
    CHECK(dc.Y0_prime == doctest::Approx(p.Y0 * factor).epsilon(1e-12));
    CHECK(dc.E0_prime * dc.Y0_prime == doctest::Approx(p.E0 * p.Y0).epsilon(1e-12));
}

TEST_CASE("power system deriv: delta_m dot is omega by definition") {
    PowerSystemParams p;
    p.Q1 = 2.98953;
    const StateVector d = power_system_deriv({0.3, -1.7, 0.2, 0.9}, p);
    CHECK(d[0] == -1.7);
}

TEST_CASE("power system deriv with V = 0 loses all V-dependence in delta dot") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unit(0.1, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        PowerSystemParams p;
        p.Q0 = unit(rng);
        p.Q1 = unit(rng);
        p.K_qw = -unit(rng);
        p.Em = unit(rng);
        p.Ym = unit(rng);
        const StateVector d = power_system_deriv({unit(rng), unit(rng), unit(rng), 0.0}, p);
        CHECK(d[2] == doctest::Approx((-p.Q0 - p.Q1) / p.K_qw).epsilon(1e-14));
    }
}

TEST_CASE("power system deriv agrees with an independent transcription") {
    PowerSystemParams p;
    p.Q1 = 2.98953;
    const StateVector x{0.17, 0.05, 0.05, 0.83};
    const StateVector got = power_system_deriv(x, p);
    const StateVector want = reference_power_deriv(x, p);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::isfinite(got[i]));
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-14));
    }

    std::mt19937 rng(21);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const StateVector xs{u(rng), u(rng), u(rng), 0.5 + 0.5 * u(rng)};
        const StateVector a = power_system_deriv(xs, p);
        const StateVector b = reference_power_deriv(xs, p);
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-13));
    }
}

TEST_CASE("food chain deriv agrees with an independent transcription") {
    FoodChainParams p;
    p.K = 0.94;
    const StateVector x{0.6, 0.35, 0.9};
    const StateVector got = food_chain_deriv(x, p);
    const StateVector want = reference_food_deriv(x, p);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::isfinite(got[i]));
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-14));
    }
}

TEST_CASE("food chain fixed point at the origin") {
    FoodChainParams p;
    const StateVector d = food_chain_deriv({0.0, 0.0, 0.0}, p);
    CHECK(d[0] == 0.0);
    CHECK(d[1] == 0.0);
    CHECK(d[2] == 0.0);
}

TEST_CASE("predator extinction plane is invariant") {
    FoodChainParams p;
    p.K = 0.94;
    CHECK(food_chain_deriv({0.6, 0.35, 0.0}, p)[2] == 0.0);

    // integrating from P = 0 keeps P = 0 exactly
    IntegrationResult res = integrate(make_ode(p), {0.5, 0.3, 0.0}, 0.1, 2000);
    REQUIRE(!res.diverged_at);
    for (const auto& s : res.trajectory.states) CHECK(s[2] == 0.0);
}

TEST_CASE("integrate: constant field gives a constant trajectory") {
    OdeModel zero;
    zero.dim = 1;
    zero.deriv = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    const IntegrationResult res = integrate(zero, {3.5}, 0.1, 100);
    REQUIRE(!res.diverged_at);
    CHECK(res.trajectory.size() == 101);
    for (const auto& s : res.trajectory.states) CHECK(s[0] == 3.5);
}

TEST_CASE("integrate reports divergence with the step index") {
    const IntegrationResult res = integrate(scalar_model(5.0), {1.0}, 1.0, 100, 1e3);
    REQUIRE(res.diverged_at.has_value());
    CHECK(*res.diverged_at >= 1);
    CHECK(res.trajectory.size() == *res.diverged_at);
    for (const auto& s : res.trajectory.states) CHECK(std::abs(s[0]) <= 1e3);
}

TEST_CASE("food chain stays bounded in the training regime") {
    FoodChainParams p;
    p.K = 0.92;
    const IntegrationResult res = integrate(make_ode(p), {0.6, 0.35, 0.9}, 0.1, 25000);
    CHECK(!res.diverged_at);
    CHECK(res.trajectory.size() == 25001);
}

TEST_CASE("parameter validation rejects zero divisors") {
    PowerSystemParams p;
    p.M = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    FoodChainParams f;
    f.K = 0.0;
    CHECK_THROWS_AS(f.validate(), std::invalid_argument);
}
