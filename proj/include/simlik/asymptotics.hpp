#pragma once

#include <utility>
#include <vector>

#include <simlik/models.hpp>

namespace simlik {

/// Plug-in sandwich covariance J2^-1 J1 J2^-1 built from the exact
/// log-marginal: J1 from score outer products, J2 from mean Hessians.
struct SandwichEstimate {
    Mat j1_hat;
    Mat j2_hat;
    Mat cov_hat;
    double condition_number_j2 = 0.0;
    int n = 0;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double v) const { return lo <= v && v <= hi; }
    double half_width() const { return 0.5 * (hi - lo); }
};

/// Central finite differences of exact_log_marginal in theta.
/// fd_step <= 0 picks the default 1e-5 * max(1, |theta_j|) per coordinate.
std::pair<Vec, Mat> score_and_hessian(const LatentModel& model, const Vec& theta,
                                      const Vec& x, double fd_step = 0.0);

SandwichEstimate sandwich(const LatentModel& model, const Vec& theta_hat,
                          const Dataset& data, double fd_step = 0.0,
                          double condition_cap = 1e12);

/// Per-coordinate Wald intervals theta_j +/- z * sqrt(cov_jj / n).
std::vector<Interval> confidence_interval(const Vec& theta_hat,
                                          const SandwichEstimate& sw, double level);

/// Inverse standard normal CDF (rational approximation, ~1e-9 absolute).
double normal_quantile(double p);

}  // namespace simlik
