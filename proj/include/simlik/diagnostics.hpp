#pragma once

#include <functional>
#include <utility>
#include <vector>

#include <simlik/models.hpp>
#include <simlik/rng.hpp>

namespace simlik {

/// Variational gap D_n^k(xi): per-observation exact log-likelihood minus the
/// k-draw Monte Carlo objective. Nonnegative by Jensen up to MC error.
struct GapEstimate {
    Xi xi;
    int k = 0;
    double gap_per_obs = 0.0;
    double k_times_gap = 0.0;
    double mc_std_error = 0.0;
};

/// Relative importance-weight variance V(xi) = E[(r - 1)^2] with r the
/// marginal-normalized importance ratio.
struct RelVarEstimate {
    Xi xi;
    double v_hat = 0.0;
    double mc_std_error = 0.0;
};

struct GapExpansionRow {
    int k = 0;
    double k_times_gap = 0.0;
    double v_half = 0.0;
    double relative_error = 0.0;
};

GapEstimate estimate_gap(const LatentModel& model, const Dataset& data, const Xi& xi,
                         int k, int R, const SeedSpec& seed);

RelVarEstimate estimate_relative_variance(const LatentModel& model, const Dataset& data,
                                          const Xi& xi, int draw_count,
                                          const SeedSpec& seed);

/// Tabulates k * D_n^k against V(xi)/2 along k_grid. The variance target is
/// estimated once at relvar_draws per observation.
std::vector<GapExpansionRow> gap_expansion_check(const LatentModel& model,
                                                 const Dataset& data, const Xi& xi,
                                                 const std::vector<int>& k_grid, int R,
                                                 const SeedSpec& seed,
                                                 int relvar_draws = 100000);

using Sampler = std::function<double(Substream&)>;
using PairSampler = std::function<std::pair<double, double>(Substream&)>;

/// |log r - (r-1)| <= |(r-1) log r| and the second-order variant, checked
/// pointwise on log-uniform draws from [e^-8, e^8]. No tolerance.
struct LogBoundReport {
    long samples = 0;
    long violations_first = 0;
    long violations_second = 0;
    bool pass() const { return violations_first == 0 && violations_second == 0; }
};
LogBoundReport check_log_bounds(long sample_count, const SeedSpec& seed);

/// Marcinkiewicz-Zygmund scaling: sqrt(k) times the s-norm of a centered
/// sample mean should be flat in k (max/min ratio under the cap).
struct MzScalingReport {
    std::vector<int> k_grid;
    std::vector<double> scaled_norms;
    double ratio = 1.0;
    double cap = 3.0;
    bool pass() const { return ratio < cap; }
};
MzScalingReport check_mz_scaling(const Sampler& centered, double moment_s,
                                 const std::vector<int>& k_grid, int reps,
                                 const SeedSpec& seed, double cap = 3.0);

/// Self-normalized sum bound: ||W_k||_alpha <= k^{1/alpha} ||V1/U1||_alpha
/// with W_k = sum V_i / sum U_i, E[U] = 1, E[V] = 0.
struct AutonormRow {
    int k = 0;
    double lhs_norm = 0.0;
    double rhs_norm = 0.0;
    double lhs_se = 0.0;
    bool holds = false;
};
struct AutonormReport {
    double alpha = 2.0;
    std::vector<AutonormRow> rows;
    bool pass() const;
};
AutonormReport check_autonorm_bound(const PairSampler& uv, double alpha,
                                    const std::vector<int>& k_grid, int reps,
                                    const SeedSpec& seed);

/// E[log of the m-sample mean] -> 0 for positive unit-mean variates.
struct LogMeanRow {
    int m = 0;
    double bias = 0.0;
    double se = 0.0;
};
struct LogMeanReport {
    std::vector<LogMeanRow> rows;
    bool pass() const;
};
LogMeanReport check_log_mean_convergence(const Sampler& positive_unit_mean,
                                         const std::vector<int>& m_grid, int reps,
                                         const SeedSpec& seed);

/// psi(x) for x > 0; recurrence up to x >= 6 then the asymptotic series.
/// Used as the oracle for E[log Ubar_m] = psi(m) - log m under Exp(1).
double digamma(double x);

}  // namespace simlik
