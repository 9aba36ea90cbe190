#pragma once

#include "ltof/harness/runner.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace ltof::harness {

inline constexpr int kReportSchemaVersion = 1;

/// Everything a report is rendered from.
struct ReportInput {
  nlohmann::json config = nlohmann::json::object();
  std::string base_hash;
  std::vector<ReportRow> rows;
};

ReportInput report_input(const GridResult& grid);

/// Header of table.csv.
const std::string& table_header();
/// Table of every row; NaN cells are written as `nan`.
std::string table_csv(const std::vector<ReportRow>& rows);
/// Regret against k for one method: best-of-m rows for the baselines, one
/// row per k for the proxy methods. Header: k,m,percent_regret_pre,
/// percent_regret_post,regret_post,seeds,status.
std::string regret_vs_k_csv(const std::vector<ReportRow>& rows, const std::string& method);
/// Machine-readable summary with schema_version, config, hash and rows.
nlohmann::json summary_json(const ReportInput& input);

nlohmann::json row_to_json(const ReportRow& row);
/// Throws ParseError naming the field on malformed input.
ReportRow row_from_json(const nlohmann::json& j);

/// rows.json: the collected rows from which the report can be re-rendered.
void save_rows(const ReportInput& input, const std::filesystem::path& path);
ReportInput load_rows(const std::filesystem::path& path);

/// Writes table.csv, regret_vs_k_<method>.csv per method, summary.json and
/// rows.json into `dir`. Returns the written paths.
std::vector<std::filesystem::path> write_report(const ReportInput& input,
                                                const std::filesystem::path& dir);

}  // namespace ltof::harness
