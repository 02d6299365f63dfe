#include <simlik/diagnostics.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include <simlik/errors.hpp>
#include <simlik/estimators.hpp>

namespace simlik {
namespace {

Mat noise_block(const LatentModel& model, Substream& g, int count) {
    Mat out(count, model.z_dim());
    for (int l = 0; l < count; ++l) out.row(l) = model.draw_noise(g).transpose();
    return out;
}

double logsumexp(const Eigen::ArrayXd& t) {
    const double m = t.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((t - m).exp().sum());
}

}  // namespace

GapEstimate estimate_gap(const LatentModel& model, const Dataset& data, const Xi& xi,
                         int k, int R, const SeedSpec& seed) {
    if (!model.has_exact_log_marginal()) throw IntractableMarginal(model.name());
    const int n = data.n();
    Vec log_marg(n);
    for (int i = 0; i < n; ++i) log_marg[i] = model.exact_log_marginal(xi, data.row(i));

    const double log_k = std::log(static_cast<double>(k));
    double sum = 0.0, sum_sq = 0.0;
    for (int r = 0; r < R; ++r) {
        const SeedSpec rep_seed = split(seed, "rep", r);
        double v = 0.0;
        for (int i = 0; i < n; ++i) {
            Substream g(split(rep_seed, "obs", i));
            const Mat noise = noise_block(model, g, k);
            // log of the marginal-normalized average weight Ubar; the gap is
            // -E[log Ubar]. Subtracting (Ubar - 1), which has exact mean zero,
            // cuts the replicate variance from O(1/k) to O(1/k^2).
            const double log_u =
                logsumexp(model.log_ratio_block(xi, data.row(i), noise)) - log_k - log_marg[i];
            v += -(log_u - std::expm1(log_u));
        }
        v /= n;
        sum += v;
        sum_sq += v * v;
    }
    GapEstimate out;
    out.xi = xi;
    out.k = k;
    out.gap_per_obs = sum / R;
    out.k_times_gap = k * out.gap_per_obs;
    const double var = std::max(0.0, sum_sq / R - out.gap_per_obs * out.gap_per_obs);
    out.mc_std_error = R > 1 ? std::sqrt(var / (R - 1)) : std::numeric_limits<double>::infinity();
    return out;
}

RelVarEstimate estimate_relative_variance(const LatentModel& model, const Dataset& data,
                                          const Xi& xi, int draw_count,
                                          const SeedSpec& seed) {
    if (!model.has_exact_log_marginal()) throw IntractableMarginal(model.name());
    const int n = data.n();
    const int chunk = 65536;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vec x = data.row(i);
        const double lm = model.exact_log_marginal(xi, x);
        Substream g(split(seed, "obs", i));
        int left = draw_count;
        while (left > 0) {
            const int m = std::min(left, chunk);
            const Mat noise = noise_block(model, g, m);
            const Eigen::ArrayXd d2 =
                ((model.log_ratio_block(xi, x, noise) - lm).exp() - 1.0).square();
            sum += d2.sum();
            sum_sq += d2.square().sum();
            left -= m;
        }
    }
    const double total = static_cast<double>(n) * draw_count;
    RelVarEstimate out;
    out.xi = xi;
    out.v_hat = sum / total;
    const double var = std::max(0.0, sum_sq / total - out.v_hat * out.v_hat);
    out.mc_std_error = std::sqrt(var / total);
    return out;
}

std::vector<GapExpansionRow> gap_expansion_check(const LatentModel& model,
                                                 const Dataset& data, const Xi& xi,
                                                 const std::vector<int>& k_grid, int R,
                                                 const SeedSpec& seed, int relvar_draws) {
    const auto rv = estimate_relative_variance(
        model, data, xi, relvar_draws, split(seed, "relvar", 0));
    const double v_half = 0.5 * rv.v_hat;
    std::vector<GapExpansionRow> rows;
    rows.reserve(k_grid.size());
    for (std::size_t j = 0; j < k_grid.size(); ++j) {
        const auto gap = estimate_gap(model, data, xi, k_grid[j], R,
                                      split(seed, "gap", static_cast<std::int64_t>(j)));
        GapExpansionRow row;
        row.k = k_grid[j];
        row.k_times_gap = gap.k_times_gap;
        row.v_half = v_half;
        row.relative_error = v_half != 0.0
                                 ? std::abs(row.k_times_gap - v_half) / std::abs(v_half)
                                 : std::abs(row.k_times_gap);
        rows.push_back(row);
    }
    return rows;
}

LogBoundReport check_log_bounds(long sample_count, const SeedSpec& seed) {
    Substream g(seed);
    LogBoundReport rep;
    rep.samples = sample_count;
    for (long s = 0; s < sample_count; ++s) {
        const double r = std::exp(-8.0 + 16.0 * g.next_uniform());
        const double lr = std::log(r);
        const double e = r - 1.0;
        if (std::abs(lr - e) > std::abs(e * lr)) ++rep.violations_first;
        if (std::abs(lr - (e - 0.5 * e * e)) > e * e * std::abs(lr)) ++rep.violations_second;
    }
    return rep;
}

MzScalingReport check_mz_scaling(const Sampler& centered, double moment_s,
                                 const std::vector<int>& k_grid, int reps,
                                 const SeedSpec& seed, double cap) {
    MzScalingReport rep;
    rep.k_grid = k_grid;
    rep.cap = cap;
    for (std::size_t j = 0; j < k_grid.size(); ++j) {
        const int k = k_grid[j];
        Substream g(split(seed, "k", static_cast<std::int64_t>(j)));
        double acc = 0.0;
        for (int r = 0; r < reps; ++r) {
            double mean = 0.0;
            for (int l = 0; l < k; ++l) mean += centered(g);
            mean /= k;
            acc += std::pow(std::abs(mean), moment_s);
        }
        rep.scaled_norms.push_back(std::sqrt(static_cast<double>(k)) *
                                   std::pow(acc / reps, 1.0 / moment_s));
    }
    const double lo = *std::min_element(rep.scaled_norms.begin(), rep.scaled_norms.end());
    const double hi = *std::max_element(rep.scaled_norms.begin(), rep.scaled_norms.end());
    rep.ratio = hi <= 0.0 ? 1.0 : hi / std::max(lo, std::numeric_limits<double>::min());
    return rep;
}

bool AutonormReport::pass() const {
    for (const auto& row : rows)
        if (!row.holds) return false;
    return !rows.empty();
}

AutonormReport check_autonorm_bound(const PairSampler& uv, double alpha,
                                    const std::vector<int>& k_grid, int reps,
                                    const SeedSpec& seed) {
    AutonormReport rep;
    rep.alpha = alpha;

    // alpha-th moment of V1/U1 from its own (larger) sample.
    const int ratio_reps = std::max(reps, 20000);
    Substream gr(split(seed, "ratio", 0));
    double m_ratio = 0.0;
    for (int r = 0; r < ratio_reps; ++r) {
        const auto [u, v] = uv(gr);
        m_ratio += std::pow(std::abs(v / u), alpha);
    }
    m_ratio /= ratio_reps;

    for (std::size_t j = 0; j < k_grid.size(); ++j) {
        const int k = k_grid[j];
        Substream g(split(seed, "k", static_cast<std::int64_t>(j)));
        double acc = 0.0, acc_sq = 0.0;
        for (int r = 0; r < reps; ++r) {
            double su = 0.0, sv = 0.0;
            for (int l = 0; l < k; ++l) {
                const auto [u, v] = uv(g);
                su += u;
                sv += v;
            }
            const double w = std::pow(std::abs(sv / su), alpha);
            acc += w;
            acc_sq += w * w;
        }
        const double m_w = acc / reps;
        const double se_m = std::sqrt(std::max(0.0, acc_sq / reps - m_w * m_w) / reps);
        AutonormRow row;
        row.k = k;
        row.lhs_norm = std::pow(m_w, 1.0 / alpha);
        row.rhs_norm = std::pow(k * m_ratio, 1.0 / alpha);
        row.lhs_se = m_w > 0.0
                         ? se_m / (alpha * std::pow(m_w, (alpha - 1.0) / alpha))
                         : se_m;
        // moment-scale comparison; equivalent to the norm bound.
        row.holds = m_w <= k * m_ratio + 3.0 * se_m;
        rep.rows.push_back(row);
    }
    return rep;
}

bool LogMeanReport::pass() const {
    if (rows.empty()) return false;
    for (std::size_t j = 1; j < rows.size(); ++j) {
        const double slack =
            3.0 * std::sqrt(rows[j - 1].se * rows[j - 1].se + rows[j].se * rows[j].se);
        if (std::abs(rows[j].bias) > std::abs(rows[j - 1].bias) + slack) return false;
    }
    return std::abs(rows.back().bias) <= 3.0 * rows.back().se;
}

LogMeanReport check_log_mean_convergence(const Sampler& positive_unit_mean,
                                         const std::vector<int>& m_grid, int reps,
                                         const SeedSpec& seed) {
    LogMeanReport rep;
    for (std::size_t j = 0; j < m_grid.size(); ++j) {
        const int m = m_grid[j];
        Substream g(split(seed, "m", static_cast<std::int64_t>(j)));
        double acc = 0.0, acc_sq = 0.0;
        for (int r = 0; r < reps; ++r) {
            double mean = 0.0;
            for (int l = 0; l < m; ++l) mean += positive_unit_mean(g);
            const double y = std::log(mean / m);
            acc += y;
            acc_sq += y * y;
        }
        LogMeanRow row;
        row.m = m;
        row.bias = acc / reps;
        row.se = std::sqrt(std::max(0.0, acc_sq / reps - row.bias * row.bias) /
                           std::max(1, reps - 1));
        rep.rows.push_back(row);
    }
    return rep;
}

double digamma(double x) {
    double s = 0.0;
    while (x < 10.0) {
        s -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x, inv2 = inv * inv;
    return s + std::log(x) - 0.5 * inv -
           inv2 * (1.0 / 12 -
                   inv2 * (1.0 / 120 -
                           inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 / 132))));
}

}  // namespace simlik
