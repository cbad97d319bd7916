#include "bridgelab/report.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "bridgelab/numerics.hpp"
#include "bridgelab/version.hpp"

namespace bridgelab {

std::string format_cell(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void CsvTable::add_row(const std::vector<double>& vals) {
  std::vector<std::string> cells;
  cells.reserve(vals.size());
  for (double v : vals) cells.push_back(format_cell(v));
  rows.push_back(std::move(cells));
}

void CsvTable::add_row(std::vector<std::string> cells) { rows.push_back(std::move(cells)); }

bool RunReport::all_pass() const {
  for (const auto& a : assertions)
    if (!a.pass) return false;
  return true;
}

Assertion& RunReport::require(const std::string& name, double value, double threshold) {
  assertions.push_back({name, value, threshold, value <= threshold});
  return assertions.back();
}

Assertion& RunReport::require_min(const std::string& name, double value, double threshold) {
  assertions.push_back({name, value, threshold, value >= threshold});
  return assertions.back();
}

void write_report(const RunReport& report, const std::string& outdir) {
  namespace fs = std::filesystem;
  fs::create_directories(outdir);

  for (const auto& table : report.tables) {
    std::ofstream csv(fs::path(outdir) / (table.name + ".csv"), std::ios::binary);
    for (std::size_t c = 0; c < table.columns.size(); ++c)
      csv << (c ? "," : "") << table.columns[c];
    csv << "\n";
    for (const auto& row : table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) csv << (c ? "," : "") << row[c];
      csv << "\n";
    }
  }

  nlohmann::json j;
  j["experiment"] = report.experiment;
  j["config_hash"] = report.config_hash;
  j["version"] = kVersion;
  j["wallclock_s"] = report.wallclock_s;
  j["all_pass"] = report.all_pass();
  nlohmann::json asserts = nlohmann::json::array();
  for (const auto& a : report.assertions)
    asserts.push_back({{"name", a.name},
                       {"value", a.value},
                       {"threshold", a.threshold},
                       {"pass", a.pass}});
  j["assertions"] = asserts;
  nlohmann::json tables = nlohmann::json::array();
  for (const auto& t : report.tables) tables.push_back(t.name + ".csv");
  j["tables"] = tables;
  if (!report.config_echo.empty())
    j["config"] = nlohmann::json::parse(report.config_echo);

  std::ofstream out(fs::path(outdir) / "report.json", std::ios::binary);
  out << j.dump(2) << "\n";
}

}  // namespace bridgelab
