#include "simlik/estimators.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>

#include "simlik/errors.hpp"

namespace simlik {

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727417803297364056;
constexpr double kPi2Over6 = 1.6449340668482264364724151666460;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Mat draw_noise_block(const LatentModel& model, int k, const SeedSpec& stream) {
    Mat block(k, model.z_dim());
    Substream g(stream);
    for (int l = 0; l < k; ++l) block.row(l) = model.draw_noise(g).transpose();
    return block;
}

double logsumexp_row(const Eigen::ArrayXd& t) {
    const double m = t.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((t - m).exp().sum());
}

// log( k^-1 sum_l phi(d - z_l) ) for the Gumbel ratio, z in column 0.
double gumbel_log_avg_weight(double d, const Eigen::ArrayXd& z) {
    const Eigen::ArrayXd t = -0.5 * (d - z).square();
    return logsumexp_row(t) - kLogSqrt2Pi - std::log(static_cast<double>(z.size()));
}

const GumbelHeterogeneityModel* as_gumbel(const LatentModel& m) {
    return dynamic_cast<const GumbelHeterogeneityModel*>(&m);
}

double generic_log_avg_weight(const LatentModel& model, const Xi& xi, const Vec& x,
                              const Mat& noise) {
    return logsumexp_row(model.log_ratio_block(xi, x, noise)) -
           std::log(static_cast<double>(noise.rows()));
}

// ---------------------------------------------------------------------------
// Natural cubic spline on a uniform grid.

struct UniformSpline {
    double x0 = 0.0, h = 1.0;
    std::vector<double> y, m;  // values and second derivatives at the knots

    double operator()(double x) const {
        const int n = static_cast<int>(y.size());
        double s = (x - x0) / h;
        int j = static_cast<int>(std::floor(s));
        j = std::max(0, std::min(n - 2, j));
        const double a = s - j, b = 1.0 - a;
        return b * y[j] + a * y[j + 1] +
               h * h / 6.0 * ((b * b * b - b) * m[j] + (a * a * a - a) * m[j + 1]);
    }
};

UniformSpline fit_natural_spline(double x0, double h, std::vector<double> y) {
    const int n = static_cast<int>(y.size());
    UniformSpline sp{x0, h, std::move(y), std::vector<double>(n, 0.0)};
    if (n < 3) return sp;
    std::vector<double> diag(n - 2, 4.0), rhs(n - 2);
    for (int j = 1; j < n - 1; ++j)
        rhs[j - 1] = 6.0 / (h * h) * (sp.y[j - 1] - 2.0 * sp.y[j] + sp.y[j + 1]);
    for (int j = 1; j < n - 2; ++j) {  // Thomas elimination, unit off-diagonals
        const double w = 1.0 / diag[j - 1];
        diag[j] -= w;
        rhs[j] -= w * rhs[j - 1];
    }
    for (int j = n - 3; j >= 0; --j)
        sp.m[j + 1] = (rhs[j] - (j + 1 < n - 2 ? sp.m[j + 2] : 0.0)) / diag[j];
    return sp;
}

// ---------------------------------------------------------------------------
// Gumbel nested-expectation table: H_R(d) = R^-1 sum_r log(k^-1 sum_l
// phi(d - z_rl)), tabulated on a uniform d grid and evaluated by spline.
// Per replicate the Gaussian kernel factorizes, exp(-(d-z)^2/2) =
// exp(-d^2/2) * exp(-z^2/2) * exp(d z), so moving one grid step multiplies
// each draw's factor by exp(h z): one fused multiply-add per (draw, grid
// point) instead of an exp call.

UniformSpline build_gumbel_iwvi_table(const LatentModel& model, const DrawPlan& plan,
                                      double d_lo, double d_hi, double h) {
    const int G = static_cast<int>(std::ceil((d_hi - d_lo) / h)) + 1;
    std::vector<double> acc(G, 0.0);
    Eigen::ArrayXd w, step, v;
    for (int r = 0; r < plan.R; ++r) {
        const Mat block = plan.nested_block(model, r);
        const Eigen::ArrayXd z = block.col(0).array();
        w = (-0.5 * z.square()).exp();
        step = (h * z).exp();
        v = (d_lo * z).exp();
        for (int j = 0; j < G; ++j) {
            const double s = (w * v).sum();
            acc[j] += std::log(s);  // raw scale; exp(-d^2/2) folded in below
            v *= step;
        }
    }
    const double logk = std::log(static_cast<double>(plan.k));
    std::vector<double> y(G);
    for (int j = 0; j < G; ++j) {
        const double d = d_lo + j * h;
        y[j] = acc[j] / plan.R - 0.5 * d * d - kLogSqrt2Pi - logk;
    }
    return fit_natural_spline(d_lo, h, std::move(y));
}

EstimateResult finish(MaximizeResult opt, const Vec& phi, std::uint64_t fingerprint,
                      Clock::time_point t0) {
    EstimateResult out;
    out.xi_hat = Xi{opt.argmax, phi};
    out.objective_value = opt.value;
    out.plan_fingerprint = fingerprint;
    out.optimizer_trace = std::move(opt.trace);
    out.wall_time = seconds_since(t0);
    return out;
}

OptimizerConfig theta_config(const LatentModel& model, OptimizerConfig cfg) {
    cfg.method = model.theta_dim() == 1 ? OptimizerConfig::Method::golden_section
                                        : OptimizerConfig::Method::nelder_mead;
    return cfg;
}

void require_positive(int v, const char* what) {
    if (v < 1) throw std::invalid_argument(std::string(what) + " must be >= 1");
}

}  // namespace

std::uint64_t DrawPlan::fingerprint() const {
    std::string bytes;
    const auto push = [&bytes](std::uint64_t v) {
        char buf[8];
        std::memcpy(buf, &v, 8);
        bytes.append(buf, 8);
    };
    push(static_cast<std::uint64_t>(variant));
    push(static_cast<std::uint64_t>(k));
    push(static_cast<std::uint64_t>(R));
    push(seed.key());
    push(static_cast<std::uint64_t>(noise.size()));
    return detail::fnv1a(bytes);
}

Mat DrawPlan::nested_block(const LatentModel& model, int r) const {
    return draw_noise_block(model, k, split(seed, "rep", r));
}

DrawPlan make_independent_plan(const LatentModel& model, int n, int k, const SeedSpec& seed) {
    require_positive(n, "n");
    require_positive(k, "k");
    DrawPlan p{DrawPlan::Variant::independent, seed, k, 1, {}};
    p.noise.reserve(n);
    for (int i = 0; i < n; ++i) p.noise.push_back(draw_noise_block(model, k, split(seed, "obs", i)));
    return p;
}

DrawPlan make_overlapping_plan(const LatentModel& model, int k, const SeedSpec& seed) {
    require_positive(k, "k");
    DrawPlan p{DrawPlan::Variant::overlapping, seed, k, 1, {}};
    p.noise.push_back(draw_noise_block(model, k, split(seed, "shared", 0)));
    return p;
}

DrawPlan make_nested_plan(const LatentModel& model, int k, int R, const SeedSpec& seed) {
    (void)model;
    require_positive(k, "k");
    require_positive(R, "R");
    return DrawPlan{DrawPlan::Variant::nested, seed, k, R, {}};
}

double msle_objective(const LatentModel& model, const Dataset& data, const DrawPlan& plan,
                      const Xi& xi) {
    if (plan.variant == DrawPlan::Variant::nested)
        throw std::invalid_argument("msle_objective: nested plan; use iwvi_objective");
    const bool shared = plan.variant == DrawPlan::Variant::overlapping;
    if (!shared && static_cast<int>(plan.noise.size()) != data.n())
        throw DimensionMismatch("independent plan does not match the dataset size");

    const auto* gm = as_gumbel(model);
    double total = 0.0;
    for (int i = 0; i < data.n(); ++i) {
        const Mat& block = plan.noise[shared ? 0 : i];
        if (gm) {
            total += gumbel_log_avg_weight(data.x(i, 0) - xi.theta[0], block.col(0).array());
        } else {
            total += generic_log_avg_weight(model, xi, data.row(i), block);
        }
    }
    return total;
}

double iwvi_objective(const LatentModel& model, const Dataset& data, const DrawPlan& plan,
                      const Xi& xi) {
    if (plan.variant != DrawPlan::Variant::nested)
        throw std::invalid_argument("iwvi_objective requires a nested plan");
    const auto* gm = as_gumbel(model);
    double total = 0.0;
    for (int r = 0; r < plan.R; ++r) {
        const Mat block = plan.nested_block(model, r);
        if (gm) {
            const Eigen::ArrayXd z = block.col(0).array();
            for (int i = 0; i < data.n(); ++i)
                total += gumbel_log_avg_weight(data.x(i, 0) - xi.theta[0], z);
        } else {
            for (int i = 0; i < data.n(); ++i)
                total += generic_log_avg_weight(model, xi, data.row(i), block);
        }
    }
    return total / plan.R;
}

EstimateResult exact_mle(const LatentModel& model, const Dataset& data,
                         const OptimizerConfig& cfg) {
    if (data.n() == 0) throw EmptyDataset("exact_mle: empty dataset");
    if (!model.has_exact_log_marginal())
        throw IntractableMarginal(model.name() + " exposes no exact marginal");
    const auto t0 = Clock::now();
    const Objective obj = [&](const Vec& theta) {
        const Xi xi = model.make_xi(theta);
        double s = 0.0;
        for (int i = 0; i < data.n(); ++i) s += model.exact_log_marginal(xi, data.row(i));
        return s;
    };
    auto opt = maximize(obj, model.theta_box(), theta_config(model, cfg));
    return finish(std::move(opt), model.default_phi(), 0, t0);
}

namespace {

EstimateResult msle_estimate(const LatentModel& model, const Dataset& data, const DrawPlan& plan,
                             const MsleOptions& opt) {
    if (data.n() == 0) throw EmptyDataset("msle: empty dataset");
    const auto t0 = Clock::now();
    const Objective obj = [&](const Vec& theta) {
        Xi xi{theta, opt.phi_policy ? opt.phi_policy(theta) : model.default_phi()};
        return msle_objective(model, data, plan, xi);
    };
    auto res = maximize(obj, model.theta_box(), theta_config(model, opt.optimizer));
    const Vec phi = opt.phi_policy ? opt.phi_policy(res.argmax) : model.default_phi();
    return finish(std::move(res), phi, plan.fingerprint(), t0);
}

}  // namespace

EstimateResult msle_independent(const LatentModel& model, const Dataset& data, int k,
                                const SeedSpec& seed, const MsleOptions& opt) {
    const DrawPlan plan = make_independent_plan(model, data.n(), k, seed);
    return msle_estimate(model, data, plan, opt);
}

EstimateResult msle_overlapping(const LatentModel& model, const Dataset& data, int k,
                                const SeedSpec& seed, const MsleOptions& opt) {
    const DrawPlan plan = make_overlapping_plan(model, k, seed);
    return msle_estimate(model, data, plan, opt);
}

namespace {

// Gumbel fast path: tabulate the per-observation objective on a d = x - theta
// grid, spline it, and golden-section inside a window around mean(x) - gamma.
// The window is widened and the table rebuilt whenever the argmax lands on
// its edge, so the restriction cannot clip the maximizer.
EstimateResult iwvi_gumbel_table(const LatentModel& model, const Dataset& data,
                                 const DrawPlan& plan, const IwviOptions& opt,
                                 Clock::time_point t0) {
    const Box box = model.theta_box();
    const double anchor = data.x.col(0).mean() - kEulerGamma;
    const double x_min = data.x.col(0).minCoeff();
    const double x_max = data.x.col(0).maxCoeff();
    const double h = 0.05;

    double half = opt.window_half_width;
    for (int attempt = 0; attempt < 32; ++attempt) {
        const double t_lo = std::max(box.lo[0], anchor - half);
        const double t_hi = std::min(box.hi[0], anchor + half);
        const auto spline = build_gumbel_iwvi_table(model, plan, x_min - t_hi - h,
                                                    x_max - t_lo + h, h);
        const Objective obj = [&](const Vec& theta) {
            double s = 0.0;
            for (int i = 0; i < data.n(); ++i) s += spline(data.x(i, 0) - theta[0]);
            return s;
        };
        Box window{Vec::Constant(1, t_lo), Vec::Constant(1, t_hi)};
        OptimizerConfig cfg = opt.optimizer;
        cfg.method = OptimizerConfig::Method::golden_section;
        auto res = maximize(obj, window, cfg);
        const bool on_lo = res.argmax[0] - t_lo < 2.0 * h && t_lo > box.lo[0];
        const bool on_hi = t_hi - res.argmax[0] < 2.0 * h && t_hi < box.hi[0];
        if (!on_lo && !on_hi)
            return finish(std::move(res), model.default_phi(), plan.fingerprint(), t0);
        half *= 2.0;
    }
    throw NonConvergence("iwvi: search window kept hitting its edge");
}

EstimateResult iwvi_gumbel_analytic_k1(const LatentModel& model, const Dataset& data,
                                       const DrawPlan& plan, const IwviOptions& opt,
                                       Clock::time_point t0) {
    // E[log w] at k = 1: -(x - theta - gamma)^2/2 - pi^2/12 - log sqrt(2 pi).
    const Objective obj = [&](const Vec& theta) {
        double s = 0.0;
        for (int i = 0; i < data.n(); ++i) {
            const double c = data.x(i, 0) - theta[0] - kEulerGamma;
            s += -0.5 * (c * c + kPi2Over6) - kLogSqrt2Pi;
        }
        return s;
    };
    auto res = maximize(obj, model.theta_box(), theta_config(model, opt.optimizer));
    return finish(std::move(res), model.default_phi(), plan.fingerprint(), t0);
}

}  // namespace

EstimateResult iwvi_estimate(const LatentModel& model, const Dataset& data, int k, int R,
                             const SeedSpec& seed, const IwviOptions& opt) {
    if (data.n() == 0) throw EmptyDataset("iwvi: empty dataset");
    require_positive(k, "k");
    require_positive(R, "R");
    const auto t0 = Clock::now();
    const DrawPlan plan = make_nested_plan(model, k, R, seed);

    if (opt.analytic_inner_k1) {
        if (!as_gumbel(model) || k != 1)
            throw std::invalid_argument("analytic_inner_k1 needs the Gumbel model with k = 1");
        return iwvi_gumbel_analytic_k1(model, data, plan, opt, t0);
    }
    if (as_gumbel(model)) return iwvi_gumbel_table(model, data, plan, opt, t0);

    // Generic path: joint (theta, phi) search with frozen noise.
    const Box tb = model.theta_box(), pb = model.phi_box();
    const int td = tb.dim(), pd = pb.dim();
    Box joint;
    joint.lo = Vec(td + pd);
    joint.hi = Vec(td + pd);
    joint.lo << tb.lo, pb.lo;
    joint.hi << tb.hi, pb.hi;

    const Objective obj = [&](const Vec& v) {
        const Xi xi{v.head(td), v.tail(pd)};
        return iwvi_objective(model, data, plan, xi);
    };
    OptimizerConfig cfg = opt.optimizer;
    cfg.method = (td + pd) == 1 ? OptimizerConfig::Method::golden_section
                                : OptimizerConfig::Method::nelder_mead;
    auto res = maximize(obj, joint, cfg);

    EstimateResult out;
    out.xi_hat = Xi{res.argmax.head(td), res.argmax.tail(pd)};
    out.objective_value = res.value;
    out.plan_fingerprint = plan.fingerprint();
    out.optimizer_trace = std::move(res.trace);
    out.wall_time = seconds_since(t0);
    return out;
}

double iwvi_k1_closed_form(const Dataset& data) {
    if (data.n() == 0) throw EmptyDataset("iwvi_k1_closed_form: empty dataset");
    return data.x.col(0).mean() - kEulerGamma;
}

}  // namespace simlik
