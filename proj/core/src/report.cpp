#include "stablab/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "stablab/errors.hpp"

namespace stablab {

namespace {

using nlohmann::ordered_json;

ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

ordered_json table(const std::vector<std::string>& columns, const std::vector<std::vector<double>>& rows) {
  ordered_json out = ordered_json::array();
  for (const auto& row : rows) {
    ordered_json r = ordered_json::object();
    for (std::size_t c = 0; c < columns.size() && c < row.size(); ++c) r[columns[c]] = number(row[c]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_csv(const SweepReport& report) {
  std::string out;
  for (std::size_t c = 0; c < report.columns.size(); ++c) {
    if (c) out += ',';
    out += report.columns[c];
  }
  out += '\n';
  for (const auto& row : report.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

std::string to_json(const SweepReport& report) {
  ordered_json j;
  j["schema"] = "stablab.sweep";
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = report.kind;
  j["complete"] = report.complete;
  j["error"] = report.complete ? ordered_json(nullptr) : ordered_json(report.error);
  j["environment"] = {{"seed", report.seed},
                      {"gradient_tol", report.gradient_tol},
                      {"indifference_tol", report.indifference_tol}};
  try {
    j["config"] = ordered_json::parse(report.config);
  } catch (const ordered_json::exception&) {
    j["config"] = report.config;
  }
  j["columns"] = report.columns;
  j["rows"] = table(report.columns, report.rows);
  j["details"] = table(report.detail_columns, report.details);
  ordered_json fits = ordered_json::array();
  for (const RateFit& f : report.fits) {
    ordered_json coeffs = ordered_json::array();
    for (double c : f.coefficients) coeffs.push_back(number(c));
    fits.push_back({{"functional", f.functional},
                    {"model", to_string(f.model)},
                    {"subset", to_string(f.subset)},
                    {"coefficients", coeffs},
                    {"r2", number(f.r2)},
                    {"points", f.points}});
  }
  j["fits"] = fits;
  return j.dump(2) + "\n";
}

void write_text(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write \"" + path + "\"");
  out << content;
  if (!out) throw ValidationError("failed writing \"" + path + "\"");
}

}  // namespace stablab
