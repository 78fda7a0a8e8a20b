#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hkdelay/errors.hpp"
#include "hkdelay/history.hpp"

using namespace hkdelay;

namespace {

PointSet line_points(std::vector<double> xs) {
    const std::size_t n = xs.size();
    return PointSet(n, 1, std::move(xs));
}

}  // namespace

TEST_CASE("materialize constant history") {
    InitialHistorySpec spec;
    spec.depth = 1.0;
    const auto h = materialize_initial(spec, line_points({0.0, 1.0}), 2.0, 0.25);
    CHECK(h.t_earliest() == doctest::Approx(-1.0));
    CHECK(h.t_latest() == 0.0);
    CHECK(h.knot_count() == 5);
    for (double s = -1.0; s <= 0.0; s += 0.1) {
        CHECK(h.position(0, s)[0] == 0.0);
        CHECK(h.position(1, s)[0] == 1.0);
    }
    CHECK(h.lipschitz_initial() == 0.0);
}

TEST_CASE("materialize linear history extrapolates backwards") {
    InitialHistorySpec spec;
    spec.kind = InitialHistoryKind::LinearWithVelocity;
    spec.velocities = line_points({0.5});
    spec.depth = 2.0;
    const auto h = materialize_initial(spec, line_points({1.0}), 2.0, 0.1);
    CHECK(h.position(0, -2.0)[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(h.position(0, -1.0)[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(h.position(0, 0.0)[0] == 1.0);
    CHECK(h.lipschitz(0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("materialize rejects velocities at or above the speed") {
    InitialHistorySpec spec;
    spec.kind = InitialHistoryKind::LinearWithVelocity;
    spec.velocities = PointSet(1, 2, {0.6, 0.8});
    spec.depth = 1.0;
    CHECK_THROWS_AS(materialize_initial(spec, PointSet(1, 2), 1.0, 0.1), LipschitzViolation);
    CHECK_NOTHROW(materialize_initial(spec, PointSet(1, 2), 1.01, 0.1));
}

TEST_CASE("knot grid is anchored at zero") {
    InitialHistorySpec spec;
    spec.depth = 0.95;
    const auto h = materialize_initial(spec, line_points({0.0}), 2.0, 0.1);
    CHECK(h.t_earliest() <= -0.95);
    for (std::size_t k = 0; k < h.knot_count(); ++k) {
        const double scaled = h.knot_time(k) / 0.1;
        CHECK(scaled == doctest::Approx(std::round(scaled)).epsilon(1e-12));
    }
}

TEST_CASE("piecewise-linear interpolation") {
    TrajectoryHistory h(1, 1);
    h.append(0.0, line_points({1.0}));
    h.append(0.1, line_points({1.1}));
    CHECK(h.position(0, 0.05)[0] == doctest::Approx(1.05).epsilon(1e-15));
    CHECK(h.position(0, 0.0)[0] == 1.0);
    CHECK(h.position(0, 0.1)[0] == 1.1);
}

TEST_CASE("underrun reports the deficit, future queries fail") {
    TrajectoryHistory h(1, 1);
    h.append(-1.0, line_points({0.0}));
    h.append(0.0, line_points({0.0}));
    try {
        h.position(0, -1.25);
        FAIL("expected HistoryUnderrun");
    } catch (const HistoryUnderrun& e) {
        CHECK(e.deficit() == doctest::Approx(0.25));
    }
    CHECK_THROWS_AS(h.position(0, 0.001), FutureQuery);
}

TEST_CASE("append enforces strictly increasing times") {
    TrajectoryHistory h(2, 1);
    h.append(0.0, line_points({0.0, 1.0}));
    CHECK_THROWS_AS(h.append(0.0, line_points({0.0, 1.0})), OrderingError);
    CHECK_THROWS_AS(h.append(-0.1, line_points({0.0, 1.0})), OrderingError);
    CHECK_THROWS(h.append(0.1, line_points({0.0})));
}

TEST_CASE("replace_latest rewrites the last knot and its slope") {
    TrajectoryHistory h(1, 1);
    h.append(0.0, line_points({0.0}));
    h.append(1.0, line_points({5.0}));
    CHECK(h.lipschitz(0) == doctest::Approx(5.0));
    h.replace_latest(line_points({0.5}));
    CHECK(h.position(0, 1.0)[0] == 0.5);
    CHECK(h.lipschitz(0) == doctest::Approx(0.5));
    CHECK(h.lipschitz_solution() == doctest::Approx(0.5));
    h.append(2.0, line_points({1.0}));
    CHECK(h.lipschitz_solution() == doctest::Approx(0.5));
}

TEST_CASE("interpolation stays in segment hull and respects the Lipschitz bound") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coord(-3.0, 3.0);
    std::uniform_real_distribution<double> gap(0.01, 0.5);
    for (int trial = 0; trial < 20; ++trial) {
        TrajectoryHistory h(3, 2);
        double t = -2.0;
        for (int k = 0; k < 30; ++k) {
            PointSet p(3, 2);
            for (double& v : p.flat()) v = coord(rng);
            h.append(t, p);
            t += gap(rng);
        }
        std::uniform_real_distribution<double> when(h.t_earliest(), h.t_latest());
        for (int q = 0; q < 200; ++q) {
            const double s = when(rng);
            const std::size_t k = h.segment_for(s);
            REQUIRE(h.knot_time(k) <= s);
            REQUIRE(s <= h.knot_time(k + 1));
            for (std::size_t a = 0; a < 3; ++a) {
                const auto x = h.position(a, s);
                const auto lo = h.knot(k, a);
                const auto hi = h.knot(k + 1, a);
                for (std::size_t c = 0; c < 2; ++c) {
                    REQUIRE(x[c] >= std::min(lo[c], hi[c]) - 1e-12);
                    REQUIRE(x[c] <= std::max(lo[c], hi[c]) + 1e-12);
                }
                const double s2 = when(rng);
                const auto y = h.position(a, s2);
                REQUIRE(distance(x, y) <= h.lipschitz(a) * std::abs(s - s2) * (1 + 1e-9) + 1e-12);
            }
        }
    }
}

TEST_CASE("segment lookup on nonuniform grids") {
    TrajectoryHistory h(1, 1);
    const std::vector<double> ts{-1.0, -0.999, -0.5, 0.0, 0.001, 3.0, 3.5};
    for (double t : ts) h.append(t, line_points({t}));
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
        const double mid = 0.5 * (ts[k] + ts[k + 1]);
        CHECK(h.segment_for(mid) == k);
        CHECK(h.position(0, mid)[0] == doctest::Approx(mid));
    }
}

TEST_CASE("trajectory csv layout") {
    TrajectoryHistory h(2, 2);
    h.append(0.0, PointSet(2, 2, {0.0, 1.0, 2.0, 3.0}));
    std::ostringstream out;
    write_trajectory_csv(out, h);
    CHECK(out.str() == "t,agent_id,x_0,x_1\n0,0,0,1\n0,1,2,3\n");
}
