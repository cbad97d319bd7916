#pragma once

#include <string>
#include <vector>

namespace bridgelab {

struct Assertion {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct CsvTable {
  std::string name;                            // becomes <name>.csv
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;  // pre-formatted cells

  void add_row(const std::vector<double>& vals);
  void add_row(std::vector<std::string> cells);
};

struct RunReport {
  std::string experiment;
  std::string config_hash;
  std::string config_echo;
  std::vector<Assertion> assertions;
  std::vector<CsvTable> tables;
  double wallclock_s = 0.0;

  bool all_pass() const;
  Assertion& require(const std::string& name, double value, double threshold);
  // value must be at least the threshold
  Assertion& require_min(const std::string& name, double value, double threshold);
};

// Formats a double the way every CSV cell does ("%.12g").
std::string format_cell(double v);

// Writes <outdir>/report.json plus one CSV per table; creates outdir.
void write_report(const RunReport& report, const std::string& outdir);

}  // namespace bridgelab
