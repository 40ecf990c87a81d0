#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "namdkit/jobspec.hpp"

namespace namdkit {

enum class Stage { minimization, equilibration, production };
const char* to_string(Stage s);

struct InputPaths {
  std::string structure;    // PSF
  std::string coordinates;  // PDB
  std::vector<std::string> parameter_files;
  /// Companion .xsc carrying the periodic cell when the spec has no box.
  std::optional<std::string> extended_system;
  bool operator==(const InputPaths&) const = default;
};

struct ProtocolOptions {
  int minimization_steps = 10000;
  double equilibration_ns = 0.25;
  double production_ns = 1.0;
  double output_interval_ps = 10.0;
  double pressure_bar = 1.01325;
  /// 0 selects 2 fs, or 4 fs with hydrogen mass repartitioning.
  double timestep_fs = 0.0;
};

using Parameter = std::pair<std::string, std::string>;

struct NamdConfig {
  Stage stage = Stage::minimization;
  std::string label;
  std::vector<Parameter> parameters;  // emitted in this order; keys may repeat
  InputPaths input_paths;
  std::string output_prefix;

  /// First value for `key`, matched case-insensitively as NAMD does.
  std::optional<std::string> get(std::string_view key) const;
  std::vector<std::string> get_all(std::string_view key) const;
};

double timestep_fs(const JobSpec& spec, const ProtocolOptions& options = {});

/// Minimization, equilibration and production decks. Throws RefusalError if
/// the spec fails validate_jobspec, or if a periodic system has neither a
/// box in the spec nor an extended-system file.
std::vector<NamdConfig> generate_configs(const JobSpec& spec, const InputPaths& paths,
                                         const ProtocolOptions& options = {});

std::string render_config(const NamdConfig& config);

/// Inverse of render_config for the parameter list: `#` comments and blank
/// lines are skipped, the first token is the key and the rest of the line the
/// value.
std::vector<Parameter> parse_config(std::string_view text);

/// `<label>_<stage>.conf` with characters outside [A-Za-z0-9._-] replaced by '_'.
std::string config_file_name(const NamdConfig& config);
std::string sanitize_file_stem(std::string_view s);

}  // namespace namdkit
