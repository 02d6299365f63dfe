#include <doctest.h>

#include <cmath>

#include "simlik/errors.hpp"
#include "simlik/optimize.hpp"

using namespace simlik;

TEST_CASE("golden section finds the quadratic maximizer") {
    OptimizerConfig cfg;
    auto r = maximize([](const Vec& v) { return -(v[0] - 2.0) * (v[0] - 2.0); },
                      Box::cube(1, -10.0, 10.0), cfg);
    CHECK(std::abs(r.argmax[0] - 2.0) < cfg.x_tol);
    CHECK(r.value == doctest::Approx(0.0));
}

TEST_CASE("golden section handles a kink") {
    OptimizerConfig cfg;
    auto r = maximize([](const Vec& v) { return -std::abs(v[0]); }, Box::cube(1, -1.0, 1.0), cfg);
    CHECK(std::abs(r.argmax[0]) < cfg.x_tol);
}

TEST_CASE("bracket subdivision escapes a local maximum") {
    // Two bumps; the right one is higher.
    auto f = [](const Vec& v) {
        const double x = v[0];
        return std::exp(-(x + 5.0) * (x + 5.0)) + 2.0 * std::exp(-(x - 5.0) * (x - 5.0));
    };
    auto r = maximize(f, Box::cube(1, -10.0, 10.0), OptimizerConfig{});
    CHECK(r.argmax[0] == doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("determinism and monotone trace") {
    OptimizerConfig cfg;
    auto f = [](const Vec& v) { return std::sin(v[0]) - 0.01 * v[0] * v[0]; };
    auto a = maximize(f, Box::cube(1, -10.0, 10.0), cfg);
    auto b = maximize(f, Box::cube(1, -10.0, 10.0), cfg);
    CHECK(a.argmax[0] == b.argmax[0]);
    CHECK(a.value == b.value);
    for (std::size_t i = 1; i < a.trace.size(); ++i)
        CHECK(a.trace[i].best_value >= a.trace[i - 1].best_value);
}

TEST_CASE("nelder-mead maximizes a 2-D concave objective") {
    OptimizerConfig cfg;
    cfg.method = OptimizerConfig::Method::nelder_mead;
    auto f = [](const Vec& v) {
        const double a = v[0] - 1.0, b = v[1] + 2.0;
        return -(a * a + 2.0 * b * b + 0.5 * a * b);
    };
    auto r = maximize(f, Box::cube(2, -5.0, 5.0), cfg);
    CHECK(std::abs(r.argmax[0] - 1.0) < 1e-5);
    CHECK(std::abs(r.argmax[1] + 2.0) < 1e-5);
}

TEST_CASE("nelder-mead respects the box") {
    OptimizerConfig cfg;
    cfg.method = OptimizerConfig::Method::nelder_mead;
    // Unconstrained maximizer (6, 6) sits outside the box.
    auto f = [](const Vec& v) {
        return -((v[0] - 6.0) * (v[0] - 6.0) + (v[1] - 6.0) * (v[1] - 6.0));
    };
    auto r = maximize(f, Box::cube(2, -1.0, 1.0), cfg);
    CHECK(r.argmax[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.argmax[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("error paths") {
    OptimizerConfig cfg;
    CHECK_THROWS_AS(
        maximize([](const Vec&) { return std::nan(""); }, Box::cube(1, 0.0, 1.0), cfg),
        NonFiniteObjective);

    OptimizerConfig tiny;
    tiny.max_iter = 3;
    CHECK_THROWS_AS(
        maximize([](const Vec& v) { return -v[0] * v[0]; }, Box::cube(1, -10.0, 10.0), tiny),
        BudgetExceeded);

    OptimizerConfig bad;
    bad.x_tol = -1.0;
    CHECK_THROWS_AS(
        maximize([](const Vec& v) { return v[0]; }, Box::cube(1, 0.0, 1.0), bad),
        std::invalid_argument);
}
