#include <simlik/experiments.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include <simlik/asymptotics.hpp>
#include <simlik/errors.hpp>

namespace simlik {
namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

EstimateResult run_one(const LatentModel& model, const Dataset& data, EstimatorKind kind,
                       int k, int R, const SeedSpec& seed, bool analytic_k1) {
    switch (kind) {
        case EstimatorKind::mle:
            return exact_mle(model, data);
        case EstimatorKind::msle_ind:
            return msle_independent(model, data, k, seed);
        case EstimatorKind::msle_over:
            return msle_overlapping(model, data, k, seed);
        case EstimatorKind::iwvi: {
            IwviOptions opt;
            opt.analytic_inner_k1 = analytic_k1 && k == 1;
            return iwvi_estimate(model, data, k, R, seed, opt);
        }
    }
    throw std::logic_error("run_one: unreachable");
}

void finalize(CellStats& cell, double theta_star) {
    const auto& v = cell.estimates;
    const double m = static_cast<double>(v.size());
    if (v.empty()) return;
    double sum = 0.0, sq = 0.0, sq_sq = 0.0;
    for (double t : v) {
        const double e2 = (t - theta_star) * (t - theta_star);
        sum += t;
        sq += e2;
        sq_sq += e2 * e2;
    }
    cell.mean = sum / m;
    cell.mse = sq / m;
    double var = 0.0;
    for (double t : v) var += (t - cell.mean) * (t - cell.mean);
    cell.variance_part = var / m;
    cell.bias_sq = cell.mse - cell.variance_part;
    cell.mse_std_error = std::sqrt(std::max(0.0, sq_sq / m - cell.mse * cell.mse) / m);
}

}  // namespace

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::mle: return "mle";
        case EstimatorKind::msle_ind: return "msle-ind";
        case EstimatorKind::msle_over: return "msle-over";
        case EstimatorKind::iwvi: return "iwvi";
    }
    throw std::logic_error("to_string: unreachable");
}

EstimatorKind parse_estimator(const std::string& name) {
    if (name == "mle") return EstimatorKind::mle;
    if (name == "msle-ind") return EstimatorKind::msle_ind;
    if (name == "msle-over") return EstimatorKind::msle_over;
    if (name == "iwvi") return EstimatorKind::iwvi;
    throw std::invalid_argument("unknown estimator: " + name);
}

std::unique_ptr<LatentModel> make_model(const std::string& id) {
    if (id == "gumbel") return std::make_unique<GumbelHeterogeneityModel>();
    if (id == "gaussian-linear") return std::make_unique<GaussianLinearModel>();
    throw std::invalid_argument("unknown model: " + id);
}

Dataset simulate_dataset(const LatentModel& model, double theta_star, int n,
                         const SeedSpec& seed) {
    if (model.theta_dim() != 1)
        throw std::invalid_argument("simulate_dataset: scalar-theta models only");
    Substream g(seed);
    Dataset d;
    d.x.resize(n, model.x_dim());
    const Vec theta = Vec::Constant(1, theta_star);
    for (int i = 0; i < n; ++i) d.x.row(i) = model.simulate_observation(theta, g).transpose();
    return d;
}

bool ExperimentGrid::valid() const {
    if (replications < 1 || n < 1 || R < 1) return false;
    if (k_grid.empty() || estimators.empty()) return false;
    if (!std::is_sorted(k_grid.begin(), k_grid.end())) return false;
    for (int k : k_grid)
        if (k < 1) return false;
    return ci_level >= 0.0 && ci_level < 1.0;
}

ExperimentReport run_grid(const ExperimentGrid& grid) {
    if (!grid.valid()) throw std::invalid_argument("run_grid: invalid grid");
    const auto t0 = clock_type::now();
    const auto model = make_model(grid.model);
    if (model->theta_dim() != 1)
        throw std::invalid_argument("run_grid: scalar-theta models only");

    ExperimentReport rep;
    rep.grid = grid;
    for (auto kind : grid.estimators)
        for (int k : grid.k_grid) {
            CellStats c;
            c.estimator = to_string(kind);
            c.k = k;
            rep.cells.push_back(c);
        }
    std::vector<int> covered(rep.cells.size(), 0);

    const Dataset shared =
        grid.fresh_data_per_replication
            ? Dataset{}
            : simulate_dataset(*model, grid.theta_star, grid.n, split(grid.seed, "data", 0));

    for (int r = 0; r < grid.replications; ++r) {
        const Dataset data = grid.fresh_data_per_replication
                                 ? simulate_dataset(*model, grid.theta_star, grid.n,
                                                    split(grid.seed, "data", r))
                                 : shared;
        const SeedSpec rep_seed = split(grid.seed, "rep", r);
        std::size_t cell = 0;
        for (std::size_t e = 0; e < grid.estimators.size(); ++e) {
            const auto kind = grid.estimators[e];
            const SeedSpec est_seed = split(rep_seed, "est", static_cast<std::int64_t>(e));
            for (std::size_t j = 0; j < grid.k_grid.size(); ++j, ++cell) {
                const int k = grid.k_grid[j];
                try {
                    const auto res =
                        run_one(*model, data, kind, k, grid.R,
                                split(est_seed, "k", static_cast<std::int64_t>(j)),
                                grid.analytic_k1);
                    const double theta_hat = res.xi_hat.theta[0];
                    rep.cells[cell].estimates.push_back(theta_hat);
                    if (grid.ci_level > 0.0) {
                        const auto sw = sandwich(*model, res.xi_hat.theta, data);
                        const auto ci =
                            confidence_interval(res.xi_hat.theta, sw, grid.ci_level);
                        if (ci[0].contains(grid.theta_star)) ++covered[cell];
                    }
                } catch (const std::exception& err) {
                    ++rep.cells[cell].failures;
                    rep.cells[cell].errors.push_back(err.what());
                }
            }
        }
    }

    for (std::size_t c = 0; c < rep.cells.size(); ++c) {
        finalize(rep.cells[c], grid.theta_star);
        if (grid.ci_level > 0.0 && !rep.cells[c].estimates.empty())
            rep.cells[c].coverage =
                static_cast<double>(covered[c]) / rep.cells[c].estimates.size();
    }
    rep.wall_time = seconds_since(t0);
    return rep;
}

ExperimentReport boxplot_data(ExperimentGrid grid) {
    grid.fresh_data_per_replication = false;
    auto rep = run_grid(grid);
    const auto model = make_model(grid.model);
    const Dataset data =
        simulate_dataset(*model, grid.theta_star, grid.n, split(grid.seed, "data", 0));
    rep.mle_reference = exact_mle(*model, data).xi_hat.theta[0];
    return rep;
}

QuartileSummary summarize(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("summarize: empty sample");
    std::sort(values.begin(), values.end());
    const auto quantile = [&](double p) {
        const double pos = p * (values.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        const double w = pos - lo;
        return (1.0 - w) * values[lo] + w * values[hi];
    };
    QuartileSummary s;
    s.median = quantile(0.5);
    s.q1 = quantile(0.25);
    s.q3 = quantile(0.75);
    const double iqr = s.q3 - s.q1;
    s.lo_whisker = s.q3;
    s.hi_whisker = s.q1;
    for (double v : values) {
        if (v >= s.q1 - 1.5 * iqr) {
            s.lo_whisker = v;  // first (smallest) value inside the fence
            break;
        }
    }
    for (auto it = values.rbegin(); it != values.rend(); ++it) {
        if (*it <= s.q3 + 1.5 * iqr) {
            s.hi_whisker = *it;
            break;
        }
    }
    return s;
}

std::vector<CoverageRow> coverage_experiment(ExperimentGrid grid, double level) {
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("coverage_experiment: level outside (0,1)");
    grid.fresh_data_per_replication = true;
    grid.ci_level = level;
    const auto rep = run_grid(grid);
    std::vector<CoverageRow> rows;
    for (const auto& c : rep.cells)
        rows.push_back({c.estimator, c.k, c.coverage,
                        static_cast<int>(c.estimates.size())});
    return rows;
}

std::vector<PhaseRow> phase_sweep(const LatentModel& model, double theta_star,
                                  const std::vector<double>& beta_grid,
                                  const std::vector<int>& n_grid,
                                  EstimatorKind estimator, int reps,
                                  const SeedSpec& seed, int fixed_k, int R) {
    if (!std::is_sorted(n_grid.begin(), n_grid.end()))
        throw std::invalid_argument("phase_sweep: n_grid must ascend");
    std::vector<PhaseRow> rows;
    for (std::size_t bi = 0; bi < beta_grid.size(); ++bi) {
        const double beta = beta_grid[bi];
        if (!(beta >= 0.0 && beta <= 2.0))
            throw std::invalid_argument("phase_sweep: beta outside [0,2]");
        for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
            const int n = n_grid[ni];
            const int k = beta == 0.0
                              ? fixed_k
                              : static_cast<int>(std::ceil(std::pow(n, beta)));
            const SeedSpec cell_seed = split(split(seed, "beta", static_cast<std::int64_t>(bi)),
                                             "n", static_cast<std::int64_t>(ni));
            double sum = 0.0, sum_sq = 0.0, sw_sum = 0.0;
            int ok = 0;
            for (int r = 0; r < reps; ++r) {
                const SeedSpec rep_seed = split(cell_seed, "rep", r);
                const Dataset data =
                    simulate_dataset(model, theta_star, n, split(rep_seed, "data", 0));
                const auto res =
                    run_one(model, data, estimator, k, R, split(rep_seed, "est", 0), false);
                const double t = res.xi_hat.theta[0];
                sum += t;
                sum_sq += t * t;
                sw_sum += sandwich(model, res.xi_hat.theta, data).cov_hat(0, 0);
                ++ok;
            }
            PhaseRow row;
            row.beta = beta;
            row.n = n;
            row.k = k;
            const double mean = sum / ok;
            row.n_var = n * std::max(0.0, sum_sq / ok - mean * mean);
            row.sqrt_n_bias = std::sqrt(static_cast<double>(n)) * (mean - theta_star);
            row.sandwich_diag = sw_sum / ok;
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace simlik
