#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>
#include <simlik/experiments.hpp>

namespace simlik {

/// key = value lines, '#' comments, blank lines ignored. Duplicate keys keep
/// the last occurrence.
std::map<std::string, std::string> parse_config(const std::string& text);
std::map<std::string, std::string> load_config(const std::string& path);

/// Applies recognized keys onto a grid; unknown keys are an error.
/// Keys: model, theta_star, n, k_grid, estimators, replications, R, seed,
/// fresh_data, analytic_k1, ci_level  (lists are comma-separated).
void apply_config(ExperimentGrid& grid, const std::map<std::string, std::string>& kv);

/// RFC-4180 style: fields holding comma, quote or newline are quoted with
/// internal quotes doubled; '.' decimal point; header row mandatory.
std::string csv_escape(const std::string& field);
std::string to_csv(const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows);

/// Table-1 layout: one MSE row and one variance row per estimator, columns = k.
std::string table1_csv(const ExperimentReport& rep);
/// Raw per-replication estimates plus Tukey quartile summaries.
std::string boxplots_csv(const ExperimentReport& rep);
std::string coverage_csv(const std::vector<CoverageRow>& rows);
std::string phase_csv(const std::vector<PhaseRow>& rows);

/// Full JSON report embedding the config, master seed and build id.
/// include_timing = false is the canonical form (bit-identical across runs
/// with the same seed).
nlohmann::json report_json(const ExperimentReport& rep, bool include_timing = false);
nlohmann::json phase_json(const std::vector<PhaseRow>& rows, const SeedSpec& seed);

std::string format_double(double v);  // shortest round-trip decimal

void write_text_file(const std::string& path, const std::string& content);

}  // namespace simlik
