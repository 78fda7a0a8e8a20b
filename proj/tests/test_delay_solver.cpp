#include <doctest.h>

#include <cmath>
#include <random>

#include "hkdelay/delay_solver.hpp"
#include "hkdelay/errors.hpp"

using namespace hkdelay;

namespace {

// Two-knot linear history x_j(s) = p + v s on [t0, 0] for every agent.
TrajectoryHistory linear_history(const PointSet& p, const PointSet& v, double t0) {
    TrajectoryHistory h(p.size(), p.dim());
    PointSet past = p;
    for (std::size_t a = 0; a < p.size(); ++a) {
        for (std::size_t c = 0; c < p.dim(); ++c) past[a][c] = p[a][c] + v[a][c] * t0;
    }
    h.append(t0, past);
    h.append(0.0, p);
    return h;
}

// Root of (c^2 - |b|^2) tau^2 - 2 <u, b> tau - |u|^2 = 0 with u = xi - p, which is
// c tau = |xi - (p - b tau)| squared.
double linear_oracle(std::span<const double> xi, std::span<const double> p, std::span<const double> b,
                     double c) {
    double uu = 0.0, ub = 0.0, bb = 0.0;
    for (std::size_t k = 0; k < xi.size(); ++k) {
        const double u = xi[k] - p[k];
        uu += u * u;
        ub += u * b[k];
        bb += b[k] * b[k];
    }
    const double a = c * c - bb;
    return (ub + std::sqrt(ub * ub + a * uu)) / a;
}

}  // namespace

TEST_CASE("coincident constant history gives zero delay") {
    TrajectoryHistory h(1, 2);
    h.append(-1.0, PointSet(1, 2, {0.3, 0.4}));
    h.append(0.0, PointSet(1, 2, {0.3, 0.4}));
    const std::vector<double> xi{0.3, 0.4};
    const auto sol = solve_delay(xi, 0, 0.0, h, 2.0);
    CHECK(sol.tau == 0.0);
    CHECK(sol.delayed_pos == xi);
}

TEST_CASE("stationary source: tau = distance / c") {
    TrajectoryHistory h(1, 1);
    h.append(-5.0, PointSet(1, 1, {3.0}));
    h.append(0.0, PointSet(1, 1, {3.0}));
    const std::vector<double> xi{0.0};
    const auto sol = solve_delay(xi, 0, 0.0, h, 2.0);
    CHECK(sol.tau == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(sol.delayed_pos[0] == 3.0);
    CHECK_FALSE(sol.used_bisection);
}

TEST_CASE("linear source: 2 tau = 1 - 0.5 tau") {
    const auto h = linear_history(PointSet(1, 1, {1.0}), PointSet(1, 1, {0.5}), -4.0);
    const std::vector<double> xi{0.0};
    const auto sol = solve_delay(xi, 0, 0.0, h, 2.0);
    CHECK(sol.tau == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(sol.delayed_pos[0] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(sol.residual <= 2.0 * 1e-12);

    const auto bis = solve_delay_bisection(xi, 0, 0.0, h, 2.0);
    CHECK(bis.used_bisection);
    CHECK(bis.tau == doctest::Approx(0.4).epsilon(1e-11));
}

TEST_CASE("fixed-point iterates contract by L/c") {
    const auto h = linear_history(PointSet(1, 1, {1.0}), PointSet(1, 1, {0.5}), -4.0);
    const std::vector<double> xi{0.0};
    DelaySolveSettings settings;
    settings.record_iterates = true;
    const auto sol = solve_delay(xi, 0, 0.0, h, 2.0, settings);
    REQUIRE(sol.iterates.size() >= 4);
    for (std::size_t k = 0; k + 1 < sol.iterates.size(); ++k) {
        const double e0 = std::abs(sol.iterates[k] - 0.4);
        const double e1 = std::abs(sol.iterates[k + 1] - 0.4);
        CHECK(e1 <= 0.25 * e0 + 1e-15);
    }
}

TEST_CASE("warm start converges to the same root") {
    const auto h = linear_history(PointSet(1, 1, {1.0}), PointSet(1, 1, {0.5}), -4.0);
    const std::vector<double> xi{0.0};
    const auto cold = solve_delay(xi, 0, 0.0, h, 2.0);
    const auto warm = solve_delay(xi, 0, 0.0, h, 2.0, {}, 0.41);
    CHECK(warm.tau == doctest::Approx(cold.tau).epsilon(1e-12));
    CHECK(warm.iterations <= cold.iterations);
    // A warm start that would reach below the history is ignored.
    const auto bad = solve_delay(xi, 0, 0.0, h, 2.0, {}, 100.0);
    CHECK(bad.tau == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("randomized linear histories: fixed point, bisection and closed form agree") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    std::uniform_real_distribution<double> frac(0.0, 0.95);
    std::uniform_real_distribution<double> speed(0.5, 5.0);
    std::uniform_int_distribution<int> dims(1, 3);
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t d = static_cast<std::size_t>(dims(rng));
        const double c = speed(rng);
        PointSet p(1, d), v(1, d);
        std::vector<double> xi(d);
        for (double& x : p.flat()) x = coord(rng);
        for (double& x : xi) x = coord(rng);
        std::vector<double> dir(d);
        for (double& x : dir) x = coord(rng);
        const double len = norm(dir);
        if (len == 0.0) continue;
        const double vmag = frac(rng) * c;
        for (std::size_t k = 0; k < d; ++k) v[0][k] = dir[k] / len * vmag;
        // History reaches back far enough for the a priori bound.
        const double bound = distance(xi, p[0]) / (c - vmag);
        const auto h = linear_history(p, v, -2.0 * bound - 1.0);

        const double oracle = linear_oracle(xi, p[0], v[0], c);
        DelaySolveSettings settings;
        settings.max_iterations = 1000;
        const auto fp = solve_delay(xi, 0, 0.0, h, c, settings);
        const auto bis = solve_delay_bisection(xi, 0, 0.0, h, c, settings);
        const double scale = std::max(1.0, oracle);
        REQUIRE(fp.tau == doctest::Approx(oracle).epsilon(1e-9 * scale));
        REQUIRE(bis.tau == doctest::Approx(oracle).epsilon(1e-9 * scale));
        REQUIRE(fp.residual <= 1e-9);
        ++checked;
    }
    CHECK(checked > 990);
}

TEST_CASE("bisection refuses a source faster than light") {
    const auto h = linear_history(PointSet(1, 1, {1.0}), PointSet(1, 1, {3.0}), -4.0);
    const std::vector<double> xi{0.0};
    CHECK_THROWS_AS(solve_delay_bisection(xi, 0, 0.0, h, 2.0), SolverError);
}

TEST_CASE("short history surfaces as an underrun") {
    TrajectoryHistory h(1, 1);
    h.append(-0.5, PointSet(1, 1, {3.0}));
    h.append(0.0, PointSet(1, 1, {3.0}));
    const std::vector<double> xi{0.0};
    CHECK_THROWS_AS(solve_delay(xi, 0, 0.0, h, 2.0), HistoryUnderrun);
}

TEST_CASE("all_delays: stationary pair") {
    TrajectoryHistory h(2, 1);
    const PointSet p(2, 1, {0.0, 1.0});
    h.append(-2.0, p);
    h.append(0.0, p);
    const auto m = all_delays(p, 0.0, h, 2.0);
    CHECK(m.tau(0, 0) == 0.0);
    CHECK(m.tau(1, 1) == 0.0);
    CHECK(m.delayed(1, 1)[0] == 1.0);
    CHECK(m.tau(0, 1) == doctest::Approx(0.5));
    CHECK(m.tau(1, 0) == doctest::Approx(0.5));
    CHECK(m.max_tau() == doctest::Approx(0.5));
}

TEST_CASE("all_delays: coincident stationary agents") {
    TrajectoryHistory h(3, 2);
    const PointSet p(3, 2, {1.0, 1.0, 1.0, 1.0, 1.0, 1.0});
    h.append(-1.0, p);
    h.append(0.0, p);
    const auto m = all_delays(p, 0.0, h, 2.0);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(m.tau(i, j) == 0.0);
}

TEST_CASE("all_delays: delays are not symmetric") {
    const auto h = linear_history(PointSet(2, 1, {0.0, 1.0}), PointSet(2, 1, {0.0, 0.5}), -4.0);
    const PointSet now(2, 1, {0.0, 1.0});
    const auto m = all_delays(now, 0.0, h, 2.0);
    CHECK(m.tau(0, 1) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(m.tau(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m.delayed(0, 1)[0] == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("all_delays names the failing pair") {
    TrajectoryHistory h(2, 1);
    const PointSet p(2, 1, {0.0, 10.0});
    h.append(-0.1, p);
    h.append(0.0, p);
    try {
        all_delays(p, 0.0, h, 2.0);
        FAIL("expected HistoryUnderrun");
    } catch (const HistoryUnderrun& e) {
        CHECK(std::string(e.what()).find("pair (0, 1)") != std::string::npos);
        CHECK(e.deficit() > 0.0);
    }
}

TEST_CASE("settings validation") {
    DelaySolveSettings s;
    CHECK_NOTHROW(check_settings(s));
    s.tolerance = 0.0;
    CHECK_THROWS_AS(check_settings(s), ParameterError);
    s = {};
    s.bracket_margin = 0.9;
    CHECK_THROWS_AS(check_settings(s), ParameterError);
}
