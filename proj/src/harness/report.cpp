#include "ltof/harness/report.hpp"

#include "ltof/core/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace ltof::harness {

namespace {

/// Shortest round-trip decimal form; `nan` and `inf` spelled out.
std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// JSON has no NaN; it is stored as null.
nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

double read_num(const nlohmann::json& j, const char* name) {
  if (!j.contains(name)) throw ParseError(std::string("row.") + name + ": missing");
  const auto& v = j.at(name);
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!v.is_number()) throw ParseError(std::string("row.") + name + ": expected a number");
  return v.get<double>();
}

template <typename T>
T read_field(const nlohmann::json& j, const char* name) {
  if (!j.contains(name)) throw ParseError(std::string("row.") + name + ": missing");
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("row.") + name + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path.string() + "' for writing");
  out << text;
}

}  // namespace

ReportInput report_input(const GridResult& grid) {
  return ReportInput{to_json(grid.config), grid.base_hash, grid.rows};
}

const std::string& table_header() {
  static const std::string header =
      "problem,method,k,m,best_of_m,status,seeds,failed,percent_regret_pre,"
      "percent_regret_post,regret_pre,regret_post,min_regret_post,violation_pre,"
      "violation_post,it,solve,fct,et";
  return header;
}

std::string table_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << table_header() << '\n';
  for (const ReportRow& r : rows) {
    out << r.problem << ',' << r.method << ',' << r.k << ',' << r.m << ','
        << (r.best_of_m ? 1 : 0) << ',' << r.status << ',' << r.seeds << ',' << r.failed << ','
        << fmt(r.percent_pre) << ',' << fmt(r.percent_post) << ',' << fmt(r.regret_pre) << ','
        << fmt(r.regret_post) << ',' << fmt(r.min_regret_post) << ',' << fmt(r.violation_pre)
        << ',' << fmt(r.violation_post) << ',' << fmt(r.it) << ',' << fmt(r.solve) << ','
        << fmt(r.fct) << ',' << fmt(r.et) << '\n';
  }
  return out.str();
}

std::string regret_vs_k_csv(const std::vector<ReportRow>& rows, const std::string& method) {
  std::ostringstream out;
  out << "k,m,percent_regret_pre,percent_regret_post,regret_post,seeds,status\n";
  const bool baseline = !is_lto_method(method);
  for (const ReportRow& r : rows) {
    if (r.method != method || r.best_of_m != baseline) continue;
    out << r.k << ',' << r.m << ',' << fmt(r.percent_pre) << ',' << fmt(r.percent_post) << ','
        << fmt(r.regret_post) << ',' << r.seeds << ',' << r.status << '\n';
  }
  return out.str();
}

nlohmann::json row_to_json(const ReportRow& r) {
  return {{"problem", r.problem},
          {"method", r.method},
          {"k", r.k},
          {"m", r.m},
          {"best_of_m", r.best_of_m},
          {"status", r.status},
          {"seeds", r.seeds},
          {"failed", r.failed},
          {"percent_regret_pre", num(r.percent_pre)},
          {"percent_regret_post", num(r.percent_post)},
          {"regret_pre", num(r.regret_pre)},
          {"regret_post", num(r.regret_post)},
          {"min_regret_post", num(r.min_regret_post)},
          {"violation_pre", num(r.violation_pre)},
          {"violation_post", num(r.violation_post)},
          {"it", num(r.it)},
          {"solve", num(r.solve)},
          {"fct", num(r.fct)},
          {"et", num(r.et)},
          {"error", r.error}};
}

ReportRow row_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("row: expected an object");
  ReportRow r;
  r.problem = read_field<std::string>(j, "problem");
  r.method = read_field<std::string>(j, "method");
  r.k = read_field<std::size_t>(j, "k");
  r.m = read_field<std::size_t>(j, "m");
  r.best_of_m = read_field<bool>(j, "best_of_m");
  r.status = read_field<std::string>(j, "status");
  r.seeds = read_field<std::size_t>(j, "seeds");
  r.failed = read_field<std::size_t>(j, "failed");
  r.percent_pre = read_num(j, "percent_regret_pre");
  r.percent_post = read_num(j, "percent_regret_post");
  r.regret_pre = read_num(j, "regret_pre");
  r.regret_post = read_num(j, "regret_post");
  r.min_regret_post = read_num(j, "min_regret_post");
  r.violation_pre = read_num(j, "violation_pre");
  r.violation_post = read_num(j, "violation_post");
  r.it = read_num(j, "it");
  r.solve = read_num(j, "solve");
  r.fct = read_num(j, "fct");
  r.et = read_num(j, "et");
  r.error = read_field<std::string>(j, "error");
  return r;
}

nlohmann::json summary_json(const ReportInput& input) {
  nlohmann::json rows = nlohmann::json::array();
  for (const ReportRow& r : input.rows) rows.push_back(row_to_json(r));
  std::size_t failed = 0;
  for (const ReportRow& r : input.rows) failed += r.status == "failed" ? 1 : 0;
  return {{"schema_version", kReportSchemaVersion},
          {"config", input.config},
          {"dataset_hash", input.base_hash},
          {"failed_rows", failed},
          {"rows", std::move(rows)}};
}

void save_rows(const ReportInput& input, const std::filesystem::path& path) {
  write_text(path, summary_json(input).dump(1) + "\n");
}

ReportInput load_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("rows file not found: '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("schema_version") ||
      j.at("schema_version") != kReportSchemaVersion) {
    throw ParseError(path.string() + ": unsupported schema_version");
  }
  ReportInput input;
  input.config = j.value("config", nlohmann::json::object());
  input.base_hash = j.value("dataset_hash", std::string());
  if (!j.contains("rows") || !j.at("rows").is_array()) {
    throw ParseError(path.string() + ": rows must be an array");
  }
  for (const auto& row : j.at("rows")) input.rows.push_back(row_from_json(row));
  return input;
}

std::vector<std::filesystem::path> write_report(const ReportInput& input,
                                                const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    written.push_back(dir / name);
    write_text(written.back(), text);
  };
  emit("table.csv", table_csv(input.rows));
  std::vector<std::string> methods;
  std::set<std::string> seen;
  for (const ReportRow& r : input.rows) {
    if (seen.insert(r.method).second) methods.push_back(r.method);
  }
  for (const std::string& m : methods) emit("regret_vs_k_" + m + ".csv", regret_vs_k_csv(input.rows, m));
  emit("summary.json", summary_json(input).dump(1) + "\n");
  written.push_back(dir / "rows.json");
  save_rows(input, written.back());
  return written;
}

}  // namespace ltof::harness
