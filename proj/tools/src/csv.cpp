#include <cmath>
#include <cstdio>
#include <fstream>
#include <type_traits>

#include "mora_cli/cli.hpp"

namespace mora::cli {

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

void write_csv(const std::filesystem::path& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "# schema=1\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "," : "") << quote(table.columns[i]);
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      std::visit(
          [&](const auto& v) {
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, double>) {
              out << format_number(v);
            } else {
              out << quote(v);
            }
          },
          row[i]);
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw ConfigError("failed writing " + path.string());
}

Table metrics_table(const MetricsRecord& record, std::size_t operators) {
  Table t;
  t.columns = {"time_s", "W"};
  for (std::size_t o = 0; o < operators; ++o) t.columns.push_back("U_" + std::to_string(o));
  for (const char* c : {"users", "outage", "reassociations", "idle_operator"}) t.columns.emplace_back(c);
  for (const SnapshotMetrics& s : record.snapshots) {
    std::vector<std::variant<double, std::string>> row{s.time, s.utility};
    for (std::size_t o = 0; o < operators; ++o) {
      row.emplace_back(o < s.operator_utility.size() ? s.operator_utility[o] : NAN);
    }
    row.emplace_back(static_cast<double>(s.users));
    row.emplace_back(static_cast<double>(s.outage));
    row.emplace_back(static_cast<double>(s.reassociations));
    row.emplace_back(s.idle_operator ? 1.0 : 0.0);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table summary_table(const MetricsRecord& record, const ScenarioConfig& config) {
  Table t;
  t.columns = {"policy", "seed", "mean_W"};
  std::vector<std::variant<double, std::string>> row{config.policy, std::to_string(config.seed),
                                                     record.mean_utility};
  for (std::size_t o = 0; o < record.mean_operator_utility.size(); ++o) {
    t.columns.push_back("mean_U_" + std::to_string(o));
    row.emplace_back(record.mean_operator_utility[o]);
  }
  t.columns.push_back("total_reassociations");
  row.emplace_back(static_cast<double>(record.total_reassociations));
  t.columns.push_back("snapshots");
  row.emplace_back(static_cast<double>(record.snapshots.size()));
  t.rows.push_back(std::move(row));
  return t;
}

}  // namespace mora::cli
