#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "slicing/engine.hpp"

namespace slicing {

/// Shortest decimal that parses back to the same double.
std::string format_double(double x);

/// slots.csv columns, in order:
///   slot, served:<slice>..., mean_user_rate:<slice>..., reliability:<rll slice>...,
///   F:<self-managed slice>..., G:<rll user>..., y:<rll user>...,
///   rate:<user>..., lambda:<user>..., total_power_w, fixed_point_residual
/// Slices follow scenario order, users ascending id. y is empty for a user
/// that was inactive in the slot.
std::string slots_csv(const RunResult& r);
std::string summary_csv(const RunResult& r);
std::string isolation_csv(const IsolationReport& rep);

/// Writes slots.csv and summary.csv, plus isolation_report.csv when a report
/// is given. Throws std::runtime_error on I/O failure.
void emit_csv(const RunResult& r, const std::filesystem::path& dir,
              const std::optional<IsolationReport>& isolation = std::nullopt);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws std::out_of_range if absent.
  std::size_t column(const std::string& name) const;
};

/// Plain comma-separated reader for the files written above (no quoting).
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace slicing
