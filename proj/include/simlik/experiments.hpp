#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <simlik/estimators.hpp>
#include <simlik/models.hpp>

namespace simlik {

enum class EstimatorKind { mle, msle_ind, msle_over, iwvi };

std::string to_string(EstimatorKind kind);
EstimatorKind parse_estimator(const std::string& name);

/// Shipped model ids: "gumbel", "gaussian-linear".
std::unique_ptr<LatentModel> make_model(const std::string& id);

Dataset simulate_dataset(const LatentModel& model, double theta_star, int n,
                         const SeedSpec& seed);

/// Full simulation-study specification. fresh_data_per_replication = false is
/// the boxplot design (one dataset, only draws vary); true redraws the data
/// each replication for MSE tables and coverage.
struct ExperimentGrid {
    std::string model = "gumbel";
    double theta_star = 1.0;
    int n = 100;
    std::vector<int> k_grid = {10, 100, 2000};
    std::vector<EstimatorKind> estimators = {EstimatorKind::msle_ind,
                                             EstimatorKind::msle_over,
                                             EstimatorKind::iwvi};
    int replications = 500;
    int R = 10000;
    SeedSpec seed{20260901, {}};
    bool fresh_data_per_replication = true;
    bool analytic_k1 = false;  // opt-in closed-form inner expectation at k = 1
    double ci_level = 0.0;     // > 0 also builds plug-in CIs and coverage
    bool valid() const;
};

struct CellStats {
    std::string estimator;
    int k = 0;
    std::vector<double> estimates;  // one entry per successful replication
    int failures = 0;
    std::vector<std::string> errors;
    double mean = 0.0;
    double mse = 0.0;
    double variance_part = 0.0;  // population (1/N) variance
    double bias_sq = 0.0;        // mse - variance_part, exactly
    double mse_std_error = 0.0;
    double coverage = -1.0;  // fraction of CIs covering theta_star; -1 if not requested
};

struct ExperimentReport {
    ExperimentGrid grid;
    std::vector<CellStats> cells;  // ordered by (estimator position, k position)
    double mle_reference = std::numeric_limits<double>::quiet_NaN();
    double wall_time = 0.0;  // seconds; excluded from canonical serialization
};

ExperimentReport run_grid(const ExperimentGrid& grid);

/// Fixed-dataset variant; also fills mle_reference with the exact MLE on the
/// shared dataset (the dashed line of the boxplot figures).
ExperimentReport boxplot_data(ExperimentGrid grid);

struct QuartileSummary {
    double median = 0.0, q1 = 0.0, q3 = 0.0;
    double lo_whisker = 0.0, hi_whisker = 0.0;  // extreme data within 1.5 IQR
};
QuartileSummary summarize(std::vector<double> values);

struct CoverageRow {
    std::string estimator;
    int k = 0;
    double coverage = 0.0;
    int replications = 0;
};
std::vector<CoverageRow> coverage_experiment(ExperimentGrid grid, double level);

struct PhaseRow {
    double beta = 0.0;
    int n = 0;
    int k = 0;
    double n_var = 0.0;          // n * population variance of theta_hat
    double sqrt_n_bias = 0.0;    // sqrt(n) * (mean(theta_hat) - theta_star)
    double sandwich_diag = 0.0;  // mean plug-in cov_hat diagonal across reps
};
/// k = ceil(n^beta), except beta = 0 which uses fixed_k.
std::vector<PhaseRow> phase_sweep(const LatentModel& model, double theta_star,
                                  const std::vector<double>& beta_grid,
                                  const std::vector<int>& n_grid,
                                  EstimatorKind estimator, int reps,
                                  const SeedSpec& seed, int fixed_k = 4,
                                  int R = 10000);

}  // namespace simlik
