#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "namdkit/io/pdb.hpp"

namespace namdkit {

enum class CaseType { solution, bilayer };
enum class Engine { namd };
enum class IonPlacement { mc, distance };
enum class OrientationSource { none, opm, pdb };

const char* to_string(CaseType v);
const char* to_string(Engine v);
const char* to_string(IonPlacement v);
const char* to_string(OrientationSource v);

struct Membrane {
  std::map<std::string, double> upper_lipids;
  std::map<std::string, double> lower_lipids;
  double xy_dim = 0.0;  // Å
  bool operator==(const Membrane&) const = default;
};

/// Periodic box lengths (Å) for specs that carry them directly.
struct BoxSize {
  double a = 0, b = 0, c = 0;
  bool operator==(const BoxSize&) const = default;
};

struct JobSpec {
  std::string label;
  std::string pdb_id;
  std::string pdb_file;
  CaseType case_type = CaseType::solution;
  Engine engine = Engine::namd;
  double temperature = 0.0;  // K
  bool hmr = false;
  bool solvation = true;
  bool periodic = true;
  std::string ion_type = "KCl";
  double ion_concentration = 0.15;  // M
  IonPlacement ion_placement = IonPlacement::mc;
  OrientationSource orientation_source = OrientationSource::none;
  std::optional<Membrane> membrane;
  bool pore_water = false;
  std::string force_field = "CHARMM36m";
  /// Informational only; protonation is left to the system builder.
  std::optional<double> ph;
  std::optional<BoxSize> box;

  bool operator==(const JobSpec&) const = default;
};

enum class Severity { error, warning, info };
const char* to_string(Severity s);

struct Finding {
  Severity severity = Severity::info;
  std::string code;
  std::string message;
  std::string subject;
  bool operator==(const Finding&) const = default;
};

struct ValidationReport {
  std::vector<Finding> findings;

  void add(Severity severity, std::string code, std::string message, std::string subject = {});
  void merge(const ValidationReport& other);
  /// Orders findings by severity, then code, then subject.
  void sort();
  bool passed() const;
  std::size_t count(Severity s) const;
  /// JSON object {"findings": [...], "passed": bool} with sorted keys.
  std::string to_json() const;
};

struct ParsedJobSpec {
  JobSpec spec;
  /// Tolerated oddities such as unknown keys.
  std::vector<Finding> warnings;
};

/// Reads a YAML job specification. Missing required keys (label, pdb_id or
/// pdb_file, case_type, temperature) and type mismatches are reported
/// together in one SchemaError. Enums match case-insensitively. Text that
/// is not YAML at all throws ParseError.
ParsedJobSpec parse_jobspec(std::string_view yaml_text);
ParsedJobSpec read_jobspec_file(const std::string& path);

/// YAML text that parse_jobspec reads back to an equal JobSpec.
std::string serialize_jobspec(const JobSpec& spec);

/// Canonical form: trimmed label, lower-case pdb_id, leaflet ratios summing
/// to 1, temperature rounded to 0.01 K. Idempotent.
JobSpec clean_jobspec(JobSpec spec);

/// Detection-only checks on a structure: nonstandard residues, residues
/// missing backbone heavy atoms, dropped alternate locations, hydrogens and
/// chain breaks (C-N > 2.0 Å).
ValidationReport preflight_structure(const Structure& s);

inline constexpr double kDefaultMembraneMargin = 15.0;

/// Error iff xy_dim < max(x extent, y extent) of the protein + margin.
ValidationReport validate_membrane_geometry(const Structure& s, const JobSpec& spec,
                                            double margin = kDefaultMembraneMargin);

/// Field invariants plus, when a structure is supplied, preflight and (for
/// bilayers) membrane geometry.
ValidationReport validate_jobspec(const JobSpec& spec, const Structure* structure = nullptr,
                                  double margin = kDefaultMembraneMargin);

/// Residue names treated as standard by preflight: 20 amino acids, HOH,
/// TIP3 and the ions NA, CL, K, MG, CA, ZN.
bool is_standard_residue(std::string_view res_name);

}  // namespace namdkit
