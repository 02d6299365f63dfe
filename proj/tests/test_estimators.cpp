#include <doctest.h>

#include <cmath>

#include "simlik/errors.hpp"
#include "simlik/estimators.hpp"

using namespace simlik;

namespace {

Dataset simulate(const LatentModel& model, double theta_star, int n, std::uint64_t seed) {
    Substream g(SeedSpec{seed, {{"data", 0}}});
    Dataset d;
    d.x.resize(n, model.x_dim());
    const Vec theta = Vec::Constant(model.theta_dim(), theta_star);
    for (int i = 0; i < n; ++i) d.x.row(i) = model.simulate_observation(theta, g).transpose();
    return d;
}

}  // namespace

TEST_CASE("iwvi k=1 closed form") {
    Dataset d;
    d.x.resize(1, 1);
    d.x(0, 0) = kEulerGamma;
    CHECK(iwvi_k1_closed_form(d) == doctest::Approx(0.0).epsilon(1e-15));
    d.x.resize(2, 1);
    d.x << 1.0 + kEulerGamma, 1.0 + kEulerGamma;
    CHECK(iwvi_k1_closed_form(d) == doctest::Approx(1.0).epsilon(1e-15));

    Dataset empty;
    empty.x.resize(0, 1);
    CHECK_THROWS_AS(iwvi_k1_closed_form(empty), EmptyDataset);
}

TEST_CASE("iwvi with the analytic inner expectation recovers mean(x) - gamma") {
    GumbelHeterogeneityModel m;
    const Dataset d = simulate(m, 1.0, 100, 21);
    IwviOptions opt;
    opt.analytic_inner_k1 = true;
    const auto r = iwvi_estimate(m, d, 1, 1, SeedSpec{5, {}}, opt);
    CHECK(std::abs(r.xi_hat.theta[0] - iwvi_k1_closed_form(d)) < 1e-6);
}

TEST_CASE("msle closed forms at k=1 in the Gumbel model") {
    GumbelHeterogeneityModel m;
    const Dataset d = simulate(m, 1.0, 100, 33);
    const SeedSpec seed{77, {}};

    SUBCASE("independent draws: mean(x - z_i)") {
        const auto r = msle_independent(m, d, 1, seed);
        const DrawPlan plan = make_independent_plan(m, d.n(), 1, seed);
        double target = 0.0;
        for (int i = 0; i < d.n(); ++i) target += d.x(i, 0) - plan.noise[i](0, 0);
        target /= d.n();
        CHECK(std::abs(r.xi_hat.theta[0] - target) < 1e-7);
    }
    SUBCASE("overlapping draws: mean(x) - z") {
        const auto r = msle_overlapping(m, d, 1, seed);
        const DrawPlan plan = make_overlapping_plan(m, 1, seed);
        const double target = d.x.col(0).mean() - plan.noise[0](0, 0);
        CHECK(std::abs(r.xi_hat.theta[0] - target) < 1e-7);
    }
}

TEST_CASE("estimators are bit-identical under the same seed") {
    GumbelHeterogeneityModel m;
    const Dataset d = simulate(m, 1.0, 50, 4);
    const SeedSpec seed{11, {{"crn", 2}}};
    const auto a = msle_independent(m, d, 16, seed);
    const auto b = msle_independent(m, d, 16, seed);
    CHECK(a.xi_hat.theta[0] == b.xi_hat.theta[0]);
    CHECK(a.objective_value == b.objective_value);
    CHECK(a.plan_fingerprint == b.plan_fingerprint);

    const auto c = iwvi_estimate(m, d, 8, 50, seed);
    const auto e = iwvi_estimate(m, d, 8, 50, seed);
    CHECK(c.xi_hat.theta[0] == e.xi_hat.theta[0]);
    CHECK(c.objective_value == e.objective_value);

    const auto f = msle_independent(m, d, 16, SeedSpec{12, {}});
    CHECK(f.xi_hat.theta[0] != a.xi_hat.theta[0]);
}

TEST_CASE("gaussian-linear exact MLE is the sample mean") {
    GaussianLinearModel m;
    const Dataset d = simulate(m, 0.7, 200, 9);
    const auto r = exact_mle(m, d);
    CHECK(r.xi_hat.theta[0] == doctest::Approx(d.x.col(0).mean()).epsilon(1e-7));
}

TEST_CASE("gumbel exact MLE matches a fine grid scan") {
    GumbelHeterogeneityModel m;
    const Dataset d = simulate(m, 1.0, 100, 14);
    const auto r = exact_mle(m, d);
    // sanity band ~3/sqrt(n) around the truth
    CHECK(std::abs(r.xi_hat.theta[0] - 1.0) < 0.3);

    const double spacing = 1e-4;
    const Xi probe = m.make_xi(Vec::Constant(1, 0.0));
    double best = -INFINITY, best_theta = 0.0;
    for (double t = r.xi_hat.theta[0] - 0.02; t <= r.xi_hat.theta[0] + 0.02; t += spacing) {
        const Xi xi = m.make_xi(Vec::Constant(1, t));
        double s = 0.0;
        for (int i = 0; i < d.n(); ++i) s += m.exact_log_marginal(xi, d.row(i));
        if (s > best) {
            best = s;
            best_theta = t;
        }
    }
    (void)probe;
    CHECK(std::abs(r.xi_hat.theta[0] - best_theta) < 2.0 * spacing);
}

TEST_CASE("q equal to the posterior collapses MSLE onto the exact likelihood") {
    GaussianLinearModel m(1, 0.5);
    const Dataset d = simulate(m, 1.0, 80, 6);
    MsleOptions opt;
    opt.phi_policy = [](const Vec& theta) {
        Vec phi(2);
        phi << 0.5, 0.5 * theta[0];
        return phi;
    };

    const DrawPlan plan = make_independent_plan(m, d.n(), 7, SeedSpec{3, {}});
    for (double t : {-0.5, 0.3, 1.0, 2.2}) {
        Xi xi{Vec::Constant(1, t), opt.phi_policy(Vec::Constant(1, t))};
        double exact = 0.0;
        for (int i = 0; i < d.n(); ++i) exact += m.exact_log_marginal(xi, d.row(i));
        CHECK(msle_objective(m, d, plan, xi) == doctest::Approx(exact).epsilon(1e-10));
    }

    const auto r = msle_independent(m, d, 7, SeedSpec{3, {}}, opt);
    CHECK(r.xi_hat.theta[0] == doctest::Approx(d.x.col(0).mean()).epsilon(1e-6));
}

TEST_CASE("nested objective sits below the exact log likelihood (Jensen)") {
    GumbelHeterogeneityModel m;
    const Dataset d = simulate(m, 1.0, 40, 8);
    const DrawPlan plan = make_nested_plan(m, 5, 400, SeedSpec{19, {}});
    for (double t : {0.6, 1.0, 1.4}) {
        const Xi xi = m.make_xi(Vec::Constant(1, t));
        double exact = 0.0;
        for (int i = 0; i < d.n(); ++i) exact += m.exact_log_marginal(xi, d.row(i));
        const double mco = iwvi_objective(m, d, plan, xi);
        CHECK(mco < exact);  // gap strictly positive at k = 5
        CHECK(exact - mco < 0.2 * d.n());
    }
}

TEST_CASE("gumbel table path agrees with the generic nested objective") {
    GumbelHeterogeneityModel m;
    const Dataset d = simulate(m, 1.0, 60, 25);
    const SeedSpec seed{42, {}};
    const int k = 10, R = 200;

    const auto fast = iwvi_estimate(m, d, k, R, seed);

    const DrawPlan plan = make_nested_plan(m, k, R, seed);
    const Objective obj = [&](const Vec& v) {
        return iwvi_objective(m, d, plan, m.make_xi(v));
    };
    const auto slow = maximize(obj, m.theta_box(), OptimizerConfig{});
    CHECK(std::abs(fast.xi_hat.theta[0] - slow.argmax[0]) < 1e-4);
    CHECK(fast.objective_value == doctest::Approx(slow.value).epsilon(1e-7));
}

TEST_CASE("gaussian-linear joint IWVI recovers the optimal variational mean") {
    GaussianLinearModel m(1, 2.0 / 3.0, Box::cube(1, -3.0, 3.0), Box::cube(2, -2.0, 2.0));
    const Dataset d = simulate(m, 1.0, 150, 31);
    IwviOptions opt;
    opt.optimizer.method = OptimizerConfig::Method::nelder_mead;
    opt.optimizer.multistart_count = 2;
    opt.optimizer.f_tol = 1e-9;
    const auto r = iwvi_estimate(m, d, 5, 400, SeedSpec{55, {}}, opt);
    CHECK(std::abs(r.xi_hat.theta[0] - 1.0) < 0.35);
    CHECK(std::abs(r.xi_hat.phi[0] - 0.5) < 0.12);
    CHECK(std::abs(r.xi_hat.phi[1] - 0.5 * r.xi_hat.theta[0]) < 0.12);
}

TEST_CASE("plan shapes and fingerprints") {
    GumbelHeterogeneityModel m;
    const SeedSpec seed{1, {}};
    const auto ind = make_independent_plan(m, 4, 3, seed);
    CHECK(ind.noise.size() == 4);
    CHECK(ind.noise[0].rows() == 3);
    CHECK(ind.noise[0] != ind.noise[1]);

    const auto over = make_overlapping_plan(m, 3, seed);
    CHECK(over.noise.size() == 1);

    CHECK(ind.fingerprint() != over.fingerprint());
    CHECK(ind.fingerprint() == make_independent_plan(m, 4, 3, seed).fingerprint());
    CHECK(ind.fingerprint() != make_independent_plan(m, 4, 3, SeedSpec{2, {}}).fingerprint());

    const auto nested = make_nested_plan(m, 3, 2, seed);
    CHECK(nested.noise.empty());
    CHECK(nested.nested_block(m, 0) != nested.nested_block(m, 1));
    CHECK(nested.nested_block(m, 0) == nested.nested_block(m, 0));

    CHECK_THROWS_AS(make_nested_plan(m, 0, 1, seed), std::invalid_argument);
}
