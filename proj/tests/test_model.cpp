#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "hkdelay/errors.hpp"
#include "hkdelay/model.hpp"

using namespace hkdelay;

namespace {

// Brute-force sup of psi(r) r on a fine grid over (0, r_max].
double grid_sigma(const InfluenceFunction& psi, double r_max, std::size_t points = 1'000'000) {
    double best = 0.0;
    for (std::size_t k = 1; k <= points; ++k) {
        const double r = r_max * static_cast<double>(k) / static_cast<double>(points);
        best = std::max(best, psi(r) * r);
    }
    return best;
}

std::vector<InfluenceFunction> builtin_kinds() {
    return {InfluenceFunction::reciprocal(), InfluenceFunction::exponential(),
            InfluenceFunction::power_law(0.5), InfluenceFunction::power_law(1.0),
            InfluenceFunction::power_law(2.5)};
}

}  // namespace

TEST_CASE("eval_psi closed forms") {
    CHECK(eval_psi(InfluenceFunction::reciprocal(), 0.0) == 1.0);
    CHECK(eval_psi(InfluenceFunction::reciprocal(), 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(eval_psi(InfluenceFunction::exponential(), 1.0) ==
          doctest::Approx(0.36787944117144233).epsilon(1e-15));
    CHECK(eval_psi(InfluenceFunction::power_law(1.0), 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    for (const auto& psi : builtin_kinds()) CHECK(psi(0.0) == 1.0);
}

TEST_CASE("eval_psi errors") {
    CHECK_THROWS_AS(eval_psi(InfluenceFunction::reciprocal(), -1e-9), DomainError);
    auto table = InfluenceFunction::custom({{0.0, 1.0}, {1.0, 0.5}});
    CHECK(table(0.5) == doctest::Approx(0.75));
    CHECK(table(1.0) == 0.5);
    CHECK_THROWS_AS(table(1.0001), RangeError);
}

TEST_CASE("compute_sigma matches a grid maximization oracle") {
    // Exponential: max of r e^{-r} is at r = 1.
    CHECK(compute_sigma(InfluenceFunction::exponential(), 10.0) ==
          doctest::Approx(0.36787944117144233).epsilon(1e-15));
    CHECK(grid_sigma(InfluenceFunction::exponential(), 10.0) ==
          doctest::Approx(0.36787944117144233).epsilon(1e-9));
    // Reciprocal: r / (1 + r) is increasing.
    CHECK(compute_sigma(InfluenceFunction::reciprocal(), 9.0) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(compute_sigma(InfluenceFunction::reciprocal(), INFINITY) == 1.0);

    for (const auto& psi : builtin_kinds()) {
        for (double r_max : {0.3, 1.0, 2.0, 7.5, 100.0}) {
            CAPTURE(to_string(psi.kind()));
            CAPTURE(r_max);
            const double closed = compute_sigma(psi, r_max);
            CHECK(closed == doctest::Approx(grid_sigma(psi, r_max, 200'000)).epsilon(1e-8));
        }
    }
}

TEST_CASE("compute_sigma for tabulated psi bounds the true supremum") {
    auto psi = InfluenceFunction::custom({{0.0, 1.0}, {1.0, 0.6}, {3.0, 0.1}});
    const double sigma = compute_sigma(psi, 3.0);
    const double truth = grid_sigma(psi, 3.0, 2'000'000);
    CHECK(sigma >= truth);
    CHECK(sigma - truth < 1e-3);
}

TEST_CASE("compute_sigma is nondecreasing in r_max") {
    for (const auto& psi : builtin_kinds()) {
        double prev = 0.0;
        for (double r = 0.01; r < 200.0; r *= 1.3) {
            const double s = compute_sigma(psi, r);
            CHECK(s >= prev);
            prev = s;
        }
    }
}

TEST_CASE("rearrangement") {
    CHECK(rearrangement(InfluenceFunction::reciprocal(), 2.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(rearrangement(InfluenceFunction::exponential(), 0.0) == 1.0);
    auto bumpy = InfluenceFunction::custom({{0.0, 1.0}, {1.0, 0.2}, {2.0, 0.5}});
    CHECK(rearrangement(bumpy, 2.0) == doctest::Approx(0.2));
    CHECK(rearrangement(bumpy, 0.5) == doctest::Approx(0.6));
    CHECK(rearrangement(bumpy, 1.5) == doctest::Approx(0.2));

    // Identity for nonincreasing psi.
    for (const auto& psi : builtin_kinds()) {
        for (double u = 0.0; u <= 50.0; u += 0.37) CHECK(rearrangement(psi, u) == psi(u));
    }
}

TEST_CASE("psibar") {
    CHECK(psibar(InfluenceFunction::reciprocal(), 3, 1.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(psibar(InfluenceFunction::exponential(), 2, 0.0) == 1.0);
    CHECK(psibar(InfluenceFunction::exponential(), 2, 0.5) ==
          doctest::Approx(0.36787944117144233).epsilon(1e-15));
    CHECK_THROWS_AS(psibar(InfluenceFunction::reciprocal(), 1, 1.0), ParameterError);
}

TEST_CASE("built-in influence functions satisfy the standing assumptions on random pairs") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 100.0);
    for (const auto& psi : builtin_kinds()) {
        CAPTURE(to_string(psi.kind()));
        const double sigma = compute_sigma(psi, 100.0);
        for (int k = 0; k < 10'000; ++k) {
            double a = unif(rng), b = unif(rng);
            if (a > b) std::swap(a, b);
            const double pa = psi(a), pb = psi(b);
            REQUIRE(pa > 0.0);
            REQUIRE(pb > 0.0);
            REQUIRE(pb <= pa);
            REQUIRE(std::abs(pa - pb) <= psi.lipschitz_const() * (b - a) * (1 + 1e-12) + 1e-15);
            REQUIRE(pa * a <= sigma + 1e-12);
            REQUIRE(pb * b <= sigma + 1e-12);
        }
    }
}

TEST_CASE("validate reports each failed assumption") {
    ModelParameters p;
    p.n_agents = 3;
    p.dim = 2;
    p.speed = 2.0;
    p.psi = InfluenceFunction::reciprocal();
    ValidationOptions opts;
    opts.r_max = 100.0;
    auto report = validate(p, opts);
    CHECK(report.ok());
    CHECK(report.sigma == doctest::Approx(100.0 / 101.0));

    p.speed = 0.5;
    report = validate(p, opts);
    CHECK_FALSE(report.ok());
    CHECK(report.sigma >= 0.99);
    CHECK(report.failures().find("sigma_below_speed") != std::string::npos);

    p.speed = 2.0;
    p.psi = InfluenceFunction::custom({{0.0, 0.9}, {10.0, 0.5}, {200.0, 0.01}});
    report = validate(p, opts);
    CHECK_FALSE(report.ok());
    CHECK(report.failures().find("normalization") != std::string::npos);

    p.psi = InfluenceFunction::power_law(0.25);
    report = validate(p, opts);
    CHECK(report.failures().find("power_law_beta") != std::string::npos);

    p.psi = InfluenceFunction::custom({{0.0, 1.0}, {1.0, 0.0}, {200.0, 0.0}});
    report = validate(p, opts);
    CHECK(report.failures().find("positivity") != std::string::npos);

    p.n_agents = 1;
    p.psi = InfluenceFunction::reciprocal();
    CHECK(validate(p, opts).failures().find("n_agents") != std::string::npos);
}

TEST_CASE("validate: non-monotone table is admissible through its rearrangement") {
    ModelParameters p;
    p.speed = 3.0;
    p.psi = InfluenceFunction::custom({{0.0, 1.0}, {1.0, 0.2}, {2.0, 0.5}, {4.0, 0.1}, {50.0, 0.001}});
    ValidationOptions opts;
    auto report = validate(p, opts);
    CHECK_MESSAGE(report.ok(), report.failures());
    bool saw = false;
    for (const auto& c : report.checks) {
        if (c.name == "monotonicity") {
            saw = true;
            CHECK_FALSE(c.passed);
            CHECK_FALSE(c.required);
        }
    }
    CHECK(saw);
    opts.require_monotone = true;
    CHECK_FALSE(validate(p, opts).ok());
}

TEST_CASE("load_psi_table skips header and comments") {
    const auto path = std::filesystem::temp_directory_path() / "hkdelay_psi_table.txt";
    {
        std::ofstream out(path);
        out << "r psi\n# comment line\n0 1\n0.5, 0.8   # trailing\n\n2 0.25\n";
    }
    const auto table = load_psi_table(path);
    REQUIRE(table.size() == 3);
    CHECK(table[1].r == 0.5);
    CHECK(table[1].psi == 0.8);
    CHECK(table[2].psi == 0.25);
    {
        std::ofstream out(path);
        out << "0 1\n1 x\n";
    }
    CHECK_THROWS_AS(load_psi_table(path), ParameterError);
    std::filesystem::remove(path);
    CHECK_THROWS(load_psi_table(path));
}

TEST_CASE("custom table construction rejects malformed input") {
    CHECK_THROWS_AS(InfluenceFunction::custom({{0.0, 1.0}}), ParameterError);
    CHECK_THROWS_AS(InfluenceFunction::custom({{0.5, 1.0}, {1.0, 0.5}}), ParameterError);
    CHECK_THROWS_AS(InfluenceFunction::custom({{0.0, 1.0}, {1.0, 0.5}, {1.0, 0.4}}), ParameterError);
    CHECK_THROWS_AS(InfluenceFunction::power_law(0.0), ParameterError);
}
