#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "monotest/grid.hpp"
#include "monotest/inference.hpp"

namespace monotest {

/// Which CSV columns hold what.
struct ColumnMapping {
  std::string game_id = "game_id";
  std::string action = "action";
  std::optional<std::string> covariate;
  std::vector<std::string> design;
  std::optional<std::string> normalize_by;
};

struct LoadDiagnostics {
  std::size_t rows = 0;
  std::size_t games = 0;
  std::size_t dropped_games = 0;
  std::vector<std::string> warnings;
};

/// Rows are grouped by game id in order of first appearance. Actions are
/// divided by the normalize_by column when configured. Every game gets the
/// group tag equal to its row count, so mixed game sizes form separate
/// groups. Games with fewer than two rows are dropped with a warning.
/// Game-level columns (covariate, design) are taken from the first row.
ActionSample read_csv(std::istream& in, const ColumnMapping& mapping, LoadDiagnostics* diagnostics = nullptr);
ActionSample load_csv(const std::string& path, const ColumnMapping& mapping,
                      LoadDiagnostics* diagnostics = nullptr);

/// One row per observation with the columns of `mapping` (normalize_by is
/// not written).
void write_csv(std::ostream& out, const ActionSample& sample, const ColumnMapping& mapping);

/// JSON document of a test result; floating-point values use 17
/// significant digits.
std::string result_to_json(const TestResult& result);
void emit_result(const TestResult& result, const std::string& path);

/// Shortest fixed-width rendering used in CSV and JSON output.
std::string format_double(double value);

}  // namespace monotest
