#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "namdkit/analysis/fes.hpp"
#include "namdkit/analysis/series.hpp"
#include "namdkit/io/namd_log.hpp"

namespace namdkit::report {

/// `index,<name> (<unit>)` followed by one row per point. Numbers use the
/// shortest round-trip form with '.' regardless of locale; LF endings.
std::string csv_text(const analysis::TimeSeries& series);
/// Columns atom_index, residue, res_name, value.
std::string csv_text(const analysis::PerAtomSeries& series);
/// Columns timestep followed by every energy column.
std::string csv_text(const EnergyTable& table);
/// Columns rg_bin, rmsd_bin, rg_lo, rg_hi, rmsd_lo, rmsd_hi, count, free_energy.
std::string csv_text(const analysis::FesGrid& grid);

/// Writes the text produced by csv_text. Throws IoError if the path is not writable.
template <typename T>
void write_csv(const T& value, const std::filesystem::path& path);

/// Reads a two-column series CSV back; name and unit come from the header.
analysis::TimeSeries read_series_csv(std::string_view text);
analysis::TimeSeries read_series_csv_file(const std::filesystem::path& path);

/// Reads the grid written by csv_text(FesGrid).
analysis::FesGrid read_fes_csv(std::string_view text);

struct PlotStyle {
  int width = 640;
  int height = 400;
  std::string title;
  std::string x_label = "frame";
  std::string x_unit;
  /// Multiplies frame indices for the x axis (e.g. ns per frame).
  double x_scale = 1.0;
};

/// Line plot of one series with a single polyline. Throws DomainError when empty.
std::string render_svg(const analysis::TimeSeries& series, const PlotStyle& style = {});
/// Heat map with one `class="cell"` rect per occupied cell. Throws DomainError when empty.
std::string render_svg(const analysis::FesGrid& grid, const PlotStyle& style = {});

struct RunManifest {
  std::string spec_label;
  std::map<std::string, std::string> input_hashes;  // file name -> sha256 hex
  std::vector<std::string> commands_run;
  std::map<std::string, std::string> outputs;  // artifact name -> path relative to the run directory
  std::string tool_version;
  std::string generated_at;  // ISO 8601 UTC; the only non-deterministic field
};

/// JSON with sorted keys. Throws IoError if any output is missing under `run_dir`.
std::string manifest_json(const RunManifest& manifest, const std::filesystem::path& run_dir);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace namdkit::report
