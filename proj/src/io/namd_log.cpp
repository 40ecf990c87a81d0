#include "namdkit/io/namd_log.hpp"

#include "namdkit/error.hpp"
#include "../util.hpp"

namespace namdkit {

std::optional<std::size_t> EnergyTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < column_names.size(); ++i)
    if (column_names[i] == name) return i;
  return std::nullopt;
}

std::vector<double> EnergyTable::column(std::string_view name) const {
  const auto idx = column_index(name);
  if (!idx) throw DomainError("energy table has no column '" + std::string(name) + "'");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.values[*idx]);
  return out;
}

EnergyTable parse_namd_log(std::string_view text) {
  EnergyTable table;
  struct Pending {
    std::size_t line;
    std::string_view body;
  };
  std::vector<Pending> energy_lines;
  bool have_title = false;

  detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (line.starts_with("ETITLE:")) {
      table.column_names.clear();
      for (auto tok : detail::split_ws(line.substr(7))) table.column_names.emplace_back(tok);
      have_title = true;
    } else if (line.starts_with("ENERGY:")) {
      energy_lines.push_back({line_no, line.substr(7)});
    }
    return true;
  });
  if (!have_title) throw ParseError("no ETITLE: line in NAMD log");

  const auto ts_column = table.column_index("TS");
  for (const auto& [line_no, body] : energy_lines) {
    const auto tokens = detail::split_ws(body);
    if (tokens.size() != table.column_names.size()) {
      table.row_errors.push_back({line_no, "expected " + std::to_string(table.column_names.size()) +
                                               " fields, found " + std::to_string(tokens.size())});
      continue;
    }
    EnergyRow row;
    row.values.reserve(tokens.size());
    bool ok = true;
    for (auto tok : tokens) {
      const auto v = detail::parse_number<double>(tok);
      if (!v) {
        table.row_errors.push_back({line_no, "non-numeric field '" + std::string(tok) + "'"});
        ok = false;
        break;
      }
      row.values.push_back(*v);
    }
    if (!ok) continue;
    row.timestep = static_cast<std::int64_t>(row.values[ts_column.value_or(0)]);
    if (!table.rows.empty() && row.timestep < table.rows.back().timestep) {
      table.row_errors.push_back({line_no, "timestep " + std::to_string(row.timestep) + " decreases"});
      continue;
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) table.warnings.emplace_back("no ENERGY rows found");
  return table;
}

EnergyTable read_namd_log_file(const std::string& path) {
  const auto text = detail::read_text_file(path);
  try {
    return parse_namd_log(text);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace namdkit
