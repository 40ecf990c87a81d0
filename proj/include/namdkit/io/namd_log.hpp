#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace namdkit {

struct EnergyRow {
  std::int64_t timestep = 0;
  std::vector<double> values;
};

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct EnergyTable {
  std::vector<std::string> column_names;
  std::vector<EnergyRow> rows;
  std::vector<RowError> row_errors;
  std::vector<std::string> warnings;

  std::optional<std::size_t> column_index(std::string_view name) const;
  /// Values of one column, throws DomainError for an unknown column.
  std::vector<double> column(std::string_view name) const;
};

/// Extracts ETITLE:/ENERGY: lines from a NAMD log. Throws ParseError if no
/// ETITLE line exists. Bad ENERGY lines are collected in row_errors.
EnergyTable parse_namd_log(std::string_view text);
EnergyTable read_namd_log_file(const std::string& path);

}  // namespace namdkit
