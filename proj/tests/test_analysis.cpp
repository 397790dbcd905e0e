#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ngrc/analysis.hpp"
#include "ngrc/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace ngrc;

namespace {

std::vector<double> sine_series(std::size_t n, double period_steps, double amplitude = 1.0) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = amplitude *
                 std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / period_steps);
    return out;
}

DiagramRow bounded_row(double theta, std::vector<double> scatter) {
    DiagramRow r;
    r.theta = theta;
    r.scatter = std::move(scatter);
    return r;
}

DiagramRow collapsed_row(double theta) {
    DiagramRow r;
    r.theta = theta;
    r.collapse = CollapseKind::divergence;
    return r;
}

}  // namespace

TEST_CASE("local maxima of a monotone series is empty") {
    std::vector<double> up(50);
    for (std::size_t i = 0; i < up.size(); ++i) up[i] = static_cast<double>(i);
    CHECK(local_maxima(up, 0).empty());
}

TEST_CASE("local maxima of a constant series is empty, even with no discard") {
    const std::vector<double> flat(100, 2.5);
    CHECK(local_maxima(flat, 0).empty());
    CHECK(local_maxima(flat, 99).empty());
    CHECK(local_maxima(flat, 200).empty());  // discard past the end
}

TEST_CASE("local maxima of a fine sine are near the amplitude") {
    const auto s = sine_series(5000, 200.0, 0.7);
    const auto maxima = local_maxima(s, 0);
    CHECK(maxima.size() >= 20);
    for (double v : maxima) CHECK(v == doctest::Approx(0.7).epsilon(1e-3));
}

TEST_CASE("local maxima respects the discard prefix") {
    std::vector<double> s = sine_series(400, 40.0);
    const auto all = local_maxima(s, 0);
    const auto tail = local_maxima(s, 200);
    CHECK(tail.size() < all.size());
    CHECK(tail.size() >= 4);
}

TEST_CASE("rosenstein on a pure sine is non-positive within tolerance") {
    const auto s = sine_series(4000, 100.0);
    const LyapunovEstimate est = rosenstein_lle(s, 0.05);
    CHECK(est.lambda_max <= 0.01 / 0.05);  // tolerance in per-unit-time units
    CHECK(est.lambda_max < 0.05);
}

TEST_CASE("rosenstein rejects a constant series") {
    const std::vector<double> s(2000, 1.0);
    CHECK_THROWS_AS(rosenstein_lle(s, 0.1), NumericError);
}

TEST_CASE("rosenstein rejects too-short series") {
    const auto s = sine_series(40, 10.0);
    CHECK_THROWS_AS(rosenstein_lle(s, 0.1), NumericError);
}

TEST_CASE("benettin on a linear contraction recovers the eigenvalue") {
    OdeModel m;
    m.dim = 1;
    m.deriv = [](std::span<const double> x, std::span<double> out) { out[0] = -x[0]; };
    BenettinParams params;
    params.n_steps = 20000;
    const LyapunovEstimate est = benettin_lle(m, {1.0}, 0.01, params);
    CHECK(est.lambda_max == doctest::Approx(-1.0).epsilon(0.05));
    CHECK(est.method == LyapunovMethod::benettin);
}

TEST_CASE("benettin flags a diverging base trajectory") {
    OdeModel m;
    m.dim = 1;
    m.deriv = [](std::span<const double> x, std::span<double> out) { out[0] = x[0] * x[0]; };
    BenettinParams params;
    params.n_steps = 5000;
    CHECK_THROWS_AS(benettin_lle(m, {50.0}, 0.5, params), NumericError);
}

TEST_CASE("lyapunov validation tolerance") {
    CHECK(lyapunov_validation_pass(0.2, 0.2 + 0.9 * kLyapunovRelTol * 0.2));
    CHECK(!lyapunov_validation_pass(0.2, 0.2 + 2.0 * kLyapunovRelTol * 0.2));
    // near-zero reference falls back to the absolute floor
    CHECK(lyapunov_validation_pass(0.0, 0.9 * kLyapunovAbsTol));
    CHECK(!lyapunov_validation_pass(0.0, 1.1 * kLyapunovAbsTol));
}

TEST_CASE("find_tipping on a smooth continuous diagram is empty") {
    BifurcationDiagram d;
    for (int i = 0; i < 60; ++i) {
        const double theta = 0.01 * i;
        d.rows.push_back(bounded_row(theta, {1.0 + 0.01 * i, 2.0 + 0.012 * i}));
    }
    CHECK(find_tipping(d).empty());
}

TEST_CASE("find_tipping locates a single collapse flip at the midpoint") {
    BifurcationDiagram d;
    for (int i = 0; i < 10; ++i) d.rows.push_back(bounded_row(1.0 + 0.1 * i, {1.0, 2.0}));
    for (int i = 0; i < 5; ++i) d.rows.push_back(collapsed_row(2.0 + 0.1 * i));
    const auto points = find_tipping(d);
    REQUIRE(points.size() == 1);
    CHECK(points[0].kind == TippingPoint::Kind::collapse_onset);
    CHECK(points[0].theta == doctest::Approx(1.95));
}

TEST_CASE("find_tipping flags an envelope jump exceeding the local variation") {
    BifurcationDiagram d;
    std::mt19937 rng(15);
    std::uniform_real_distribution<double> noise(-0.005, 0.005);
    for (int i = 0; i < 40; ++i) {
        const double theta = 0.001 * i;
        const double base = i < 20 ? 1.0 : 1.5;  // sudden envelope jump at row 20
        d.rows.push_back(bounded_row(theta, {base + noise(rng), 0.5 + noise(rng)}));
    }
    const auto points = find_tipping(d);
    REQUIRE(!points.empty());
    bool found = false;
    for (const auto& p : points) {
        if (p.kind == TippingPoint::Kind::scatter_jump &&
            std::abs(p.theta - 0.0195) < 1e-9)
            found = true;
    }
    CHECK(found);
}

TEST_CASE("ground truth diagram is deterministic and classifies divergence") {
    OdeModel unstable;  // blows up for theta > 1
    ModelFamily family;
    family.name = "toy";
    family.dim = 1;
    family.default_observable = 0;
    family.at = [](double theta) {
        OdeModel m;
        m.dim = 1;
        m.deriv = [theta](std::span<const double> x, std::span<double> out) {
            out[0] = (theta - 1.0) * x[0] + std::sin(x[0]);
        };
        return m;
    };

    DiagramSettings s;
    s.grid = {0.2, 0.4, 2.5};
    s.x0 = {1.0};
    s.dt = 0.1;
    s.n_steps = 400;
    s.observable = 0;
    s.compute_lyapunov = false;
    s.threads = 2;

    const BifurcationDiagram a = ground_truth_bifurcation(family, s);
    REQUIRE(a.rows.size() == 3);
    CHECK(!a.rows[0].collapse);
    CHECK(a.rows[2].collapse == CollapseKind::divergence);

    s.threads = 1;
    const BifurcationDiagram b = ground_truth_bifurcation(family, s);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(a.rows[i].theta == b.rows[i].theta);
        CHECK(a.rows[i].scatter == b.rows[i].scatter);
        CHECK(a.rows[i].collapse == b.rows[i].collapse);
    }
}

TEST_CASE("gamma sweep records per-gamma failures and continues") {
    // duplicated coordinate makes the feature gram singular; beta = 0 then
    // fails the solve for every gamma, which must be recorded, not thrown
    ModelFamily family;
    family.name = "toy";
    family.dim = 2;
    family.default_observable = 0;
    family.at = [](double theta) {
        OdeModel m;
        m.dim = 2;
        m.deriv = [theta](std::span<const double> x, std::span<double> out) {
            out[0] = theta - x[0];
            out[1] = theta - x[1];
        };
        return m;
    };

    TrainingSet set;
    Trajectory t;
    t.dt = 0.1;
    for (int i = 0; i < 1200; ++i) {
        const double v = std::sin(0.07 * i);
        t.states.push_back({v, v});
    }
    set.samples.push_back({t, 1.0});

    NgrcConfig cfg;
    cfg.d = 2;
    cfg.k = 1;
    cfg.s = 1;
    cfg.orders = {1};
    cfg.state_orders = {0, 1};
    cfg.beta = 0.0;

    DiagramSettings s;
    s.grid = {1.0};
    s.x0 = {0.0, 0.0};
    s.dt = 0.1;
    s.n_steps = 200;
    s.observable = 0;
    s.compute_lyapunov = false;

    const GammaSweepResult sweep =
        gamma_sweep(set, cfg, std::vector<double>{0.2, 0.4}, family, s);
    REQUIRE(sweep.entries.size() == 2);
    for (const auto& entry : sweep.entries) {
        CHECK(!entry.error.empty());
        CHECK(!entry.all_pass);
    }
}

TEST_CASE("diagram settings are validated") {
    ModelFamily family;
    family.dim = 1;
    family.at = [](double) { return OdeModel{}; };
    DiagramSettings s;
    s.x0 = {1.0};
    s.dt = 0.1;
    s.n_steps = 10;
    CHECK_THROWS_AS(ground_truth_bifurcation(family, s), std::invalid_argument);  // empty grid
    s.grid = {2.0, 1.0};
    CHECK_THROWS_AS(ground_truth_bifurcation(family, s), std::invalid_argument);  // unsorted
}
