// simlik: command-line front end for the estimation laboratory.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <simlik/asymptotics.hpp>
#include <simlik/build_id.hpp>
#include <simlik/diagnostics.hpp>
#include <simlik/estimators.hpp>
#include <simlik/experiments.hpp>
#include <simlik/report.hpp>

using nlohmann::json;
using namespace simlik;

namespace {

struct CommonOpts {
    std::string model = "gumbel";
    std::string data_path;
    int n = 100;
    double theta_star = 1.0;
    std::uint64_t seed = 20260901;
    std::string out;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--model", o.model, "model id: gumbel | gaussian-linear");
    cmd->add_option("--data", o.data_path, "dataset file (whitespace text); simulated when absent");
    cmd->add_option("--n", o.n, "observations to simulate when --data is absent");
    cmd->add_option("--theta-star", o.theta_star, "truth used for simulation");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--out", o.out, "output file (stdout when absent)");
}

Dataset get_data(const LatentModel& model, const CommonOpts& o) {
    if (!o.data_path.empty()) return Dataset::load(o.data_path);
    return simulate_dataset(model, o.theta_star, o.n, SeedSpec{o.seed, {{"data", 0}}});
}

void emit(const CommonOpts& o, const std::string& text) {
    if (o.out.empty())
        std::cout << text;
    else
        write_text_file(o.out, text);
}

json vec_json(const Vec& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

json estimate_json(const EstimateResult& r) {
    return {{"theta_hat", vec_json(r.xi_hat.theta)},
            {"phi_hat", vec_json(r.xi_hat.phi)},
            {"objective_value", r.objective_value},
            {"plan_fingerprint", r.plan_fingerprint},
            {"build_id", kBuildId}};
}

EstimateResult run_estimator(const LatentModel& model, const Dataset& data,
                             const std::string& name, int k, int R, std::uint64_t seed) {
    const SeedSpec s{seed, {{"est", 0}}};
    switch (parse_estimator(name)) {
        case EstimatorKind::mle: return exact_mle(model, data);
        case EstimatorKind::msle_ind: return msle_independent(model, data, k, s);
        case EstimatorKind::msle_over: return msle_overlapping(model, data, k, s);
        case EstimatorKind::iwvi: return iwvi_estimate(model, data, k, R, s);
    }
    throw std::logic_error("unreachable");
}

ExperimentGrid grid_from_flags(const std::string& config_path) {
    ExperimentGrid grid;
    if (!config_path.empty()) apply_config(grid, load_config(config_path));
    return grid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulated-likelihood estimation laboratory"};
    app.require_subcommand(1);

    // estimate
    CommonOpts est_o;
    std::string est_name = "mle";
    int est_k = 100, est_R = 10000;
    auto* est = app.add_subcommand("estimate", "fit one estimator on one dataset");
    add_common(est, est_o);
    est->add_option("--estimator", est_name, "mle | msle-ind | msle-over | iwvi");
    est->add_option("--k", est_k, "importance draws per observation");
    est->add_option("--R", est_R, "inner replicates (iwvi)");

    // diagnose
    CommonOpts diag_o;
    std::string check = "gap";
    std::vector<int> diag_k_grid{10, 100, 1000};
    int diag_k = 100, diag_R = 10000, diag_draws = 100000;
    std::vector<double> diag_theta;
    auto* diag = app.add_subcommand("diagnose", "gap / relvar / expansion / lemmas checks");
    add_common(diag, diag_o);
    diag->add_option("--check", check, "gap | relvar | expansion | lemmas");
    diag->add_option("--k-grid", diag_k_grid, "k grid for the expansion check")->delimiter(',');
    diag->add_option("--k", diag_k, "k for the gap check");
    diag->add_option("--R", diag_R, "gap replicates");
    diag->add_option("--draws", diag_draws, "relative-variance draws per observation");
    diag->add_option("--theta", diag_theta, "evaluation theta (default theta-star)")->delimiter(',');

    // ci
    CommonOpts ci_o;
    std::string ci_name = "mle";
    int ci_k = 100, ci_R = 10000;
    double level = 0.95;
    auto* ci = app.add_subcommand("ci", "estimate plus plug-in confidence interval");
    add_common(ci, ci_o);
    ci->add_option("--estimator", ci_name, "mle | msle-ind | msle-over | iwvi");
    ci->add_option("--k", ci_k, "importance draws per observation");
    ci->add_option("--R", ci_R, "inner replicates (iwvi)");
    ci->add_option("--level", level, "confidence level in (0,1)");

    // grid-driven commands
    std::string t1_config, t1_out, t1_json;
    auto* t1 = app.add_subcommand("table1", "MSE table across estimators and k");
    t1->add_option("--config", t1_config, "key = value grid configuration");
    t1->add_option("--out", t1_out, "CSV output file (stdout when absent)");
    t1->add_option("--json", t1_json, "also write the full JSON report here");

    std::string bp_config, bp_out, bp_json;
    auto* bp = app.add_subcommand("boxplots", "per-replication estimates on one fixed dataset");
    bp->add_option("--config", bp_config, "key = value grid configuration");
    bp->add_option("--out", bp_out, "CSV output file (stdout when absent)");
    bp->add_option("--json", bp_json, "also write the full JSON report here");

    std::string cov_config, cov_out;
    double cov_level = 0.95;
    auto* cov = app.add_subcommand("coverage", "plug-in CI coverage per estimator and k");
    cov->add_option("--config", cov_config, "key = value grid configuration");
    cov->add_option("--level", cov_level, "confidence level");
    cov->add_option("--out", cov_out, "CSV output file (stdout when absent)");

    CommonOpts ph_o;
    std::string ph_name = "msle-ind";
    std::vector<double> beta_grid{0.0, 1.0, 1.5};
    std::vector<int> n_grid{25, 50, 100};
    int ph_reps = 100, ph_fixed_k = 4, ph_R = 10000;
    bool ph_json_out = false;
    auto* ph = app.add_subcommand("phase", "k = n^beta sweep of rescaled error moments");
    add_common(ph, ph_o);
    ph->add_option("--estimator", ph_name, "estimator under sweep");
    ph->add_option("--beta-grid", beta_grid, "growth exponents in [0,2]")->delimiter(',');
    ph->add_option("--n-grid", n_grid, "sample sizes, ascending")->delimiter(',');
    ph->add_option("--reps", ph_reps, "replications per cell");
    ph->add_option("--fixed-k", ph_fixed_k, "k used when beta = 0");
    ph->add_option("--R", ph_R, "inner replicates (iwvi)");
    ph->add_flag("--emit-json", ph_json_out, "emit JSON instead of CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*est) {
            const auto model = make_model(est_o.model);
            const auto r = run_estimator(*model, get_data(*model, est_o), est_name, est_k,
                                         est_R, est_o.seed);
            emit(est_o, estimate_json(r).dump(2) + "\n");
        } else if (*diag) {
            const auto model = make_model(diag_o.model);
            const Dataset data = get_data(*model, diag_o);
            Vec theta = Vec::Constant(model->theta_dim(), diag_o.theta_star);
            if (!diag_theta.empty())
                theta = Eigen::Map<const Vec>(diag_theta.data(), diag_theta.size());
            const Xi xi = model->make_xi(theta);
            const SeedSpec seed{diag_o.seed, {{"diag", 0}}};
            json out{{"build_id", kBuildId}, {"check", check}};
            if (check == "gap") {
                const auto g = estimate_gap(*model, data, xi, diag_k, diag_R, seed);
                out["gap"] = {{"k", g.k},
                              {"gap_per_obs", g.gap_per_obs},
                              {"k_times_gap", g.k_times_gap},
                              {"mc_std_error", g.mc_std_error}};
            } else if (check == "relvar") {
                const auto v = estimate_relative_variance(*model, data, xi, diag_draws, seed);
                out["relvar"] = {{"v_hat", v.v_hat}, {"mc_std_error", v.mc_std_error}};
            } else if (check == "expansion") {
                json table = json::array();
                for (const auto& row :
                     gap_expansion_check(*model, data, xi, diag_k_grid, diag_R, seed, diag_draws))
                    table.push_back({{"k", row.k},
                                     {"k_times_gap", row.k_times_gap},
                                     {"v_half", row.v_half},
                                     {"relative_error", row.relative_error}});
                out["expansion"] = table;
            } else if (check == "lemmas") {
                const auto lb = check_log_bounds(1000000, split(seed, "logbounds", 0));
                const auto mz = check_mz_scaling(
                    [](Substream& g) { return g.next_normal(); }, 2.0, {10, 100, 1000}, 2000,
                    split(seed, "mz", 0));
                const auto an = check_autonorm_bound(
                    [](Substream& g) { return std::make_pair(1.0, g.next_normal()); }, 2.0,
                    {2, 10, 50}, 4000, split(seed, "autonorm", 0));
                const auto lm = check_log_mean_convergence(
                    [](Substream& g) { return -std::log1p(-g.next_uniform()); },
                    {1, 10, 100, 1000}, 4000, split(seed, "logmean", 0));
                out["lemmas"] = {{"log_bounds", lb.pass()},
                                 {"mz_scaling", mz.pass()},
                                 {"autonorm", an.pass()},
                                 {"log_mean", lm.pass()}};
            } else {
                throw std::invalid_argument("unknown --check: " + check);
            }
            emit(diag_o, out.dump(2) + "\n");
        } else if (*ci) {
            const auto model = make_model(ci_o.model);
            const Dataset data = get_data(*model, ci_o);
            const auto r = run_estimator(*model, data, ci_name, ci_k, ci_R, ci_o.seed);
            const auto sw = sandwich(*model, r.xi_hat.theta, data);
            const auto ivs = confidence_interval(r.xi_hat.theta, sw, level);
            json intervals = json::array();
            for (const auto& iv : ivs) intervals.push_back({{"lo", iv.lo}, {"hi", iv.hi}});
            json out = estimate_json(r);
            out["level"] = level;
            out["cov_hat_diag"] = vec_json(sw.cov_hat.diagonal());
            out["intervals"] = intervals;
            emit(ci_o, out.dump(2) + "\n");
        } else if (*t1) {
            const auto rep = run_grid(grid_from_flags(t1_config));
            CommonOpts o;
            o.out = t1_out;
            emit(o, table1_csv(rep));
            if (!t1_json.empty()) write_text_file(t1_json, report_json(rep).dump(2) + "\n");
        } else if (*bp) {
            const auto rep = boxplot_data(grid_from_flags(bp_config));
            CommonOpts o;
            o.out = bp_out;
            emit(o, boxplots_csv(rep));
            if (!bp_json.empty()) write_text_file(bp_json, report_json(rep).dump(2) + "\n");
        } else if (*cov) {
            const auto rows = coverage_experiment(grid_from_flags(cov_config), cov_level);
            CommonOpts o;
            o.out = cov_out;
            emit(o, coverage_csv(rows));
        } else if (*ph) {
            const auto model = make_model(ph_o.model);
            const SeedSpec seed{ph_o.seed, {{"phase", 0}}};
            const auto rows = phase_sweep(*model, ph_o.theta_star, beta_grid, n_grid,
                                          parse_estimator(ph_name), ph_reps, seed,
                                          ph_fixed_k, ph_R);
            emit(ph_o, ph_json_out ? phase_json(rows, seed).dump(2) + "\n" : phase_csv(rows));
        }
    } catch (const std::exception& err) {
        std::fprintf(stderr, "simlik: %s\n", err.what());
        return 1;
    }
    return 0;
}
