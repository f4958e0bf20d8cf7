#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mora/analysis.hpp"

namespace mora::cli {

enum ExitCode : int {
  kOk = 0,
  kViolation = 1,    // a verified property failed
  kConfigError = 2,  // bad flags, config keys or output location
  kGuard = 3,        // enumeration guard or infeasible instance
};

/// Full command line handling; returns the process exit code.
int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// 9 significant digits, '.' separator.
std::string format_number(double value);
/// "# schema=1", the header, then one line per row.
void write_csv(const std::filesystem::path& path, const Table& table);

Table metrics_table(const MetricsRecord& record, std::size_t operators);
Table summary_table(const MetricsRecord& record, const ScenarioConfig& config);

}  // namespace mora::cli
