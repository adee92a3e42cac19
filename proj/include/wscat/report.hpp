#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wscat/errors.hpp"

namespace wscat {

// Tabular experiment output plus a JSON manifest holding the run's identity
// and summary quantities.  All cells are doubles; integer-valued parameters
// print without a decimal point under %.17g.
struct ExperimentReport {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  nlohmann::ordered_json manifest;

  void add_row(const std::vector<double>& row) {
    if (row.size() != columns.size())
      throw Error("report: row width does not match column count");
    rows.push_back(row);
  }

  double cell(std::size_t row, const std::string& column) const {
    for (std::size_t c = 0; c < columns.size(); ++c)
      if (columns[c] == column) return rows[row][c];
    throw Error("report: no column named " + column);
  }

  std::vector<double> column_values(const std::string& column) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) out.push_back(cell(r, column));
    return out;
  }
};

// CSV with a header row, comma delimiter, floats at 17 significant digits.
inline void write_report_csv(const ExperimentReport& report,
                             const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw Error("write_report_csv: cannot open " + path);
  for (std::size_t c = 0; c < report.columns.size(); ++c)
    std::fprintf(fp, "%s%s", c ? "," : "", report.columns[c].c_str());
  std::fprintf(fp, "\n");
  for (const auto& row : report.rows) {
    for (std::size_t c = 0; c < row.size(); ++c)
      std::fprintf(fp, "%s%.17g", c ? "," : "", row[c]);
    std::fprintf(fp, "\n");
  }
  std::fclose(fp);
}

inline void write_manifest(const nlohmann::ordered_json& manifest,
                           const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw Error("write_manifest: cannot open " + path);
  std::string text = manifest.dump(2);
  std::fwrite(text.data(), 1, text.size(), fp);
  std::fputc('\n', fp);
  std::fclose(fp);
}

// Ordinary least-squares slope of y against x.
inline double least_squares_slope(const std::vector<double>& x,
                                  const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ParameterViolation("least_squares_slope: need >= 2 matched points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  if (den == 0.0)
    throw ParameterViolation("least_squares_slope: degenerate abscissae");
  return num / den;
}

}  // namespace wscat
