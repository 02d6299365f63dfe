#pragma once

#include <cstdint>
#include <vector>

#include "simlik/models.hpp"
#include "simlik/optimize.hpp"
#include "simlik/rng.hpp"

namespace simlik {

/// Frozen draws backing a simulated-likelihood objective. Draws are stored
/// as noise variables eps, so the same plan serves every parameter value
/// through the reparameterization z = g_phi(x, eps) (common random numbers).
struct DrawPlan {
    enum class Variant { independent, overlapping, nested };

    Variant variant = Variant::independent;
    SeedSpec seed;
    int k = 1;
    int R = 1;  // nested only

    /// independent: one k x z_dim block per observation.
    /// overlapping: a single k x z_dim block shared by all observations.
    /// nested: empty; replicate r's block is regenerated from
    ///         split(seed, "rep", r) on demand (R can reach 1e4, k 1e3+,
    ///         materializing R*k latents would cost hundreds of MB).
    std::vector<Mat> noise;

    std::uint64_t fingerprint() const;

    /// The k x z_dim noise block for nested replicate r.
    Mat nested_block(const LatentModel& model, int r) const;
};

DrawPlan make_independent_plan(const LatentModel& model, int n, int k, const SeedSpec& seed);
DrawPlan make_overlapping_plan(const LatentModel& model, int k, const SeedSpec& seed);
DrawPlan make_nested_plan(const LatentModel& model, int k, int R, const SeedSpec& seed);

struct EstimateResult {
    Xi xi_hat;
    double objective_value = 0.0;
    std::uint64_t plan_fingerprint = 0;
    std::vector<IterationRecord> optimizer_trace;
    double wall_time = 0.0;  // seconds; excluded from canonical serialization
};

/// Sum over observations of log( k^-1 sum_l exp(log ratio) ) with the
/// plan's frozen draws; usable for independent and overlapping plans.
double msle_objective(const LatentModel& model, const Dataset& data, const DrawPlan& plan,
                      const Xi& xi);

/// Nested-expectation Monte Carlo objective: sum_i R^-1 sum_r of the
/// k-draw log average over replicate r's frozen noise.
double iwvi_objective(const LatentModel& model, const Dataset& data, const DrawPlan& plan,
                      const Xi& xi);

EstimateResult exact_mle(const LatentModel& model, const Dataset& data,
                         const OptimizerConfig& cfg = {});

struct MsleOptions {
    OptimizerConfig optimizer;
    /// Ties phi to theta during the theta search (default: keep the model's
    /// default phi fixed). With q equal to the posterior the objective
    /// reduces to the exact log likelihood for every draw set.
    std::function<Vec(const Vec& theta)> phi_policy;
};

EstimateResult msle_independent(const LatentModel& model, const Dataset& data, int k,
                                const SeedSpec& seed, const MsleOptions& opt = {});
EstimateResult msle_overlapping(const LatentModel& model, const Dataset& data, int k,
                                const SeedSpec& seed, const MsleOptions& opt = {});

struct IwviOptions {
    OptimizerConfig optimizer;
    /// Gumbel model, k = 1 only: replace the inner Monte Carlo average by
    /// its closed-form expectation, making the objective exact in theta.
    bool analytic_inner_k1 = false;
    /// Gumbel fast path: half-width of the theta search window around
    /// mean(x) - gamma; widened and rebuilt when the argmax lands on the
    /// edge. Ignored by the generic path.
    double window_half_width = 0.8;
};

EstimateResult iwvi_estimate(const LatentModel& model, const Dataset& data, int k, int R,
                             const SeedSpec& seed, const IwviOptions& opt = {});

/// mean(x) - Euler gamma; the k = 1 closed form for the Gumbel model.
double iwvi_k1_closed_form(const Dataset& data);

}  // namespace simlik
