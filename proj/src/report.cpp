#include <simlik/report.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <simlik/build_id.hpp>

namespace simlik {
namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("not a boolean: " + v);
}

}  // namespace

std::map<std::string, std::string> parse_config(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": empty key");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

std::map<std::string, std::string> load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void apply_config(ExperimentGrid& grid, const std::map<std::string, std::string>& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "model") {
            grid.model = value;
        } else if (key == "theta_star") {
            grid.theta_star = std::stod(value);
        } else if (key == "n") {
            grid.n = std::stoi(value);
        } else if (key == "k_grid") {
            grid.k_grid.clear();
            for (const auto& s : split_list(value)) grid.k_grid.push_back(std::stoi(s));
        } else if (key == "estimators") {
            grid.estimators.clear();
            for (const auto& s : split_list(value)) grid.estimators.push_back(parse_estimator(s));
        } else if (key == "replications") {
            grid.replications = std::stoi(value);
        } else if (key == "R") {
            grid.R = std::stoi(value);
        } else if (key == "seed") {
            grid.seed = SeedSpec{static_cast<std::uint64_t>(std::stoull(value)), {}};
        } else if (key == "fresh_data") {
            grid.fresh_data_per_replication = parse_bool(value);
        } else if (key == "analytic_k1") {
            grid.analytic_k1 = parse_bool(value);
        } else if (key == "ci_level") {
            grid.ci_level = std::stod(value);
        } else {
            throw std::invalid_argument("unknown config key: " + key);
        }
    }
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string to_csv(const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    const auto emit = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += csv_escape(row[i]);
        }
        out += "\r\n";
    };
    emit(header);
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("to_csv: ragged row");
        emit(row);
    }
    return out;
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string table1_csv(const ExperimentReport& rep) {
    std::vector<std::string> header{"estimator", "metric"};
    for (int k : rep.grid.k_grid) header.push_back("k=" + std::to_string(k));
    std::vector<std::vector<std::string>> rows;
    for (auto kind : rep.grid.estimators) {
        const std::string name = to_string(kind);
        std::vector<std::string> mse{name, "mse"}, var{name, "variance"};
        for (int k : rep.grid.k_grid) {
            for (const auto& c : rep.cells)
                if (c.estimator == name && c.k == k) {
                    mse.push_back(format_double(c.mse));
                    var.push_back(format_double(c.variance_part));
                }
        }
        rows.push_back(mse);
        rows.push_back(var);
    }
    return to_csv(header, rows);
}

std::string boxplots_csv(const ExperimentReport& rep) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& c : rep.cells)
        for (std::size_t r = 0; r < c.estimates.size(); ++r)
            rows.push_back({c.estimator, std::to_string(c.k), std::to_string(r),
                            format_double(c.estimates[r])});
    return to_csv({"estimator", "k", "replication", "estimate"}, rows);
}

std::string coverage_csv(const std::vector<CoverageRow>& rows) {
    std::vector<std::vector<std::string>> out;
    for (const auto& r : rows)
        out.push_back({r.estimator, std::to_string(r.k), format_double(r.coverage),
                       std::to_string(r.replications)});
    return to_csv({"estimator", "k", "coverage", "replications"}, out);
}

std::string phase_csv(const std::vector<PhaseRow>& rows) {
    std::vector<std::vector<std::string>> out;
    for (const auto& r : rows)
        out.push_back({format_double(r.beta), std::to_string(r.n), std::to_string(r.k),
                       format_double(r.n_var), format_double(r.sqrt_n_bias),
                       format_double(r.sandwich_diag)});
    return to_csv({"beta", "n", "k", "n_var", "sqrt_n_bias", "sandwich_diag"}, out);
}

namespace {

nlohmann::json seed_json(const SeedSpec& seed) {
    nlohmann::json path = nlohmann::json::array();
    for (const auto& [label, idx] : seed.stream_path)
        path.push_back({{"label", label}, {"index", idx}});
    return {{"master_seed", seed.master_seed}, {"stream_path", path}};
}

nlohmann::json grid_json(const ExperimentGrid& g) {
    nlohmann::json est = nlohmann::json::array();
    for (auto kind : g.estimators) est.push_back(to_string(kind));
    return {{"model", g.model},
            {"theta_star", g.theta_star},
            {"n", g.n},
            {"k_grid", g.k_grid},
            {"estimators", est},
            {"replications", g.replications},
            {"R", g.R},
            {"seed", seed_json(g.seed)},
            {"fresh_data_per_replication", g.fresh_data_per_replication},
            {"analytic_k1", g.analytic_k1},
            {"ci_level", g.ci_level}};
}

}  // namespace

nlohmann::json report_json(const ExperimentReport& rep, bool include_timing) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : rep.cells) {
        nlohmann::json jc = {{"estimator", c.estimator},
                             {"k", c.k},
                             {"estimates", c.estimates},
                             {"failures", c.failures},
                             {"errors", c.errors},
                             {"mean", c.mean},
                             {"mse", c.mse},
                             {"variance_part", c.variance_part},
                             {"bias_sq", c.bias_sq},
                             {"mse_std_error", c.mse_std_error}};
        if (c.coverage >= 0.0) jc["coverage"] = c.coverage;
        cells.push_back(jc);
    }
    nlohmann::json j = {{"build_id", kBuildId},
                        {"config", grid_json(rep.grid)},
                        {"cells", cells}};
    if (std::isfinite(rep.mle_reference)) j["mle_reference"] = rep.mle_reference;
    if (include_timing) j["wall_time"] = rep.wall_time;
    return j;
}

nlohmann::json phase_json(const std::vector<PhaseRow>& rows, const SeedSpec& seed) {
    nlohmann::json table = nlohmann::json::array();
    for (const auto& r : rows)
        table.push_back({{"beta", r.beta},
                         {"n", r.n},
                         {"k", r.k},
                         {"n_var", r.n_var},
                         {"sqrt_n_bias", r.sqrt_n_bias},
                         {"sandwich_diag", r.sandwich_diag}});
    return {{"build_id", kBuildId}, {"seed", seed_json(seed)}, {"table", table}};
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
}

}  // namespace simlik
