#pragma once

#include <string>

#include "stablab/harness.hpp"

namespace stablab {

/// Version of the JSON report layout; bumped on incompatible changes.
inline constexpr int kReportSchemaVersion = 1;

/// Header line plus one row per grid point, every value printed with 17
/// significant digits.
std::string to_csv(const SweepReport& report);

/// Schema-versioned JSON document (pretty-printed, stable key order).
std::string to_json(const SweepReport& report);

/// Writes `content` to `path`, creating parent directories. ValidationError
/// if the file cannot be written.
void write_text(const std::string& path, const std::string& content);

/// %.17g formatting; NaN and infinities are printed as nan / inf / -inf.
std::string format_double(double v);

}  // namespace stablab
