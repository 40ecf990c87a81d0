#include "namdkit/namd_config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "namdkit/error.hpp"
#include "util.hpp"

namespace namdkit {

const char* to_string(Stage s) {
  switch (s) {
    case Stage::minimization: return "minimization";
    case Stage::equilibration: return "equilibration";
    case Stage::production: return "production";
  }
  return "minimization";
}

namespace {

bool iequal(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

std::int64_t steps_for(double duration_fs, double dt_fs, const char* what) {
  const double n = duration_fs / dt_fs;
  const auto rounded = std::llround(n);
  if (rounded <= 0 || std::abs(n - static_cast<double>(rounded)) > 1e-6 * std::max(1.0, n))
    throw DomainError(std::string(what) + " of " + detail::shortest(duration_fs) + " fs is not a whole number of " +
                      detail::shortest(dt_fs) + " fs steps");
  return rounded;
}

class Builder {
 public:
  void set(std::string key, std::string value) { params_.emplace_back(std::move(key), std::move(value)); }
  void set(std::string key, double value) { set(std::move(key), detail::shortest(value)); }
  void set(std::string key, std::int64_t value) { set(std::move(key), std::to_string(value)); }
  void set(std::string key, int value) { set(std::move(key), std::to_string(value)); }
  std::vector<Parameter> take() { return std::move(params_); }

 private:
  std::vector<Parameter> params_;
};

}  // namespace

std::optional<std::string> NamdConfig::get(std::string_view key) const {
  for (const auto& [k, v] : parameters)
    if (iequal(k, key)) return v;
  return std::nullopt;
}

std::vector<std::string> NamdConfig::get_all(std::string_view key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : parameters)
    if (iequal(k, key)) out.push_back(v);
  return out;
}

double timestep_fs(const JobSpec& spec, const ProtocolOptions& options) {
  if (options.timestep_fs > 0) return options.timestep_fs;
  return spec.hmr ? 4.0 : 2.0;
}

std::string sanitize_file_stem(std::string_view s) {
  std::string out;
  for (char c : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
    out += ok ? c : '_';
  }
  if (out.empty()) out = "job";
  return out;
}

std::string config_file_name(const NamdConfig& config) {
  return sanitize_file_stem(config.label) + "_" + to_string(config.stage) + ".conf";
}

std::vector<NamdConfig> generate_configs(const JobSpec& spec, const InputPaths& paths, const ProtocolOptions& options) {
  const auto report = validate_jobspec(spec);
  if (!report.passed()) {
    std::string msg = "refusing to generate NAMD input for '" + spec.label + "': validation errors";
    for (const auto& f : report.findings)
      if (f.severity == Severity::error) msg += "\n  " + f.code + ": " + f.message;
    throw RefusalError(msg);
  }
  if (spec.periodic && !spec.box && !paths.extended_system)
    throw RefusalError("periodic system '" + spec.label +
                       "' needs cell dimensions: add a box to the spec or supply an extended-system (.xsc) file");
  if (paths.structure.empty() || paths.coordinates.empty())
    throw RefusalError("structure and coordinate paths are required");
  if (paths.parameter_files.empty()) throw RefusalError("at least one force-field parameter file is required");

  const double dt = timestep_fs(spec, options);
  const double T = spec.temperature;
  const auto output_every = steps_for(options.output_interval_ps * 1000.0, dt, "output interval");
  const std::string stem = sanitize_file_stem(spec.label);
  const bool membrane = spec.case_type == CaseType::bilayer;

  auto common_head = [&](Builder& b, Stage stage, const std::string& prefix) {
    b.set("structure", paths.structure);
    b.set("coordinates", paths.coordinates);
    if (stage != Stage::minimization) {
      const std::string prev = stem + "_" + to_string(stage == Stage::equilibration ? Stage::minimization
                                                                                    : Stage::equilibration);
      b.set("bincoordinates", prev + ".coor");
      if (stage == Stage::production) b.set("binvelocities", prev + ".vel");
      if (spec.periodic) b.set("extendedSystem", prev + ".xsc");
    } else if (spec.periodic && !spec.box) {
      b.set("extendedSystem", *paths.extended_system);
    }
    b.set("outputName", prefix);
    b.set("firsttimestep", 0);
    b.set("paraTypeCharmm", "on");
    for (const auto& p : paths.parameter_files) b.set("parameters", p);
    if (stage != Stage::production) b.set("temperature", T);

    b.set("exclude", "scaled1-4");
    b.set("1-4scaling", 1.0);
    b.set("cutoff", 12.0);
    b.set("switching", "on");
    b.set("vdwForceSwitching", "on");
    b.set("switchdist", 10.0);
    b.set("pairlistdist", 16.0);
    b.set("stepspercycle", 20);
    b.set("nonbondedFreq", 1);
    b.set("fullElectFrequency", 1);
    b.set("timestep", dt);
    b.set("rigidBonds", "all");
    b.set("rigidTolerance", 1e-8);

    if (spec.periodic) {
      if (stage == Stage::minimization && spec.box) {
        b.set("cellBasisVector1", detail::shortest(spec.box->a) + " 0 0");
        b.set("cellBasisVector2", "0 " + detail::shortest(spec.box->b) + " 0");
        b.set("cellBasisVector3", "0 0 " + detail::shortest(spec.box->c));
        b.set("cellOrigin", "0 0 0");
      }
      b.set("wrapWater", "on");
      b.set("wrapAll", "on");
      b.set("wrapNearest", "off");
      b.set("PME", "yes");
      b.set("PMEInterpOrder", 6);
      b.set("PMEGridSpacing", 1.0);
    }

    b.set("outputEnergies", output_every);
    b.set("outputPressure", output_every);
    b.set("restartfreq", output_every);
    b.set("dcdfreq", output_every);
    b.set("dcdUnitCell", spec.periodic ? "yes" : "no");
    if (spec.periodic) b.set("xstFreq", output_every);
  };

  auto thermostat = [&](Builder& b) {
    b.set("langevin", "on");
    b.set("langevinDamping", 1.0);
    b.set("langevinTemp", T);
    b.set("langevinHydrogen", "off");
  };

  std::vector<NamdConfig> out;
  for (const Stage stage : {Stage::minimization, Stage::equilibration, Stage::production}) {
    NamdConfig c;
    c.stage = stage;
    c.label = spec.label;
    c.input_paths = paths;
    c.output_prefix = stem + "_" + to_string(stage);
    Builder b;
    common_head(b, stage, c.output_prefix);
    switch (stage) {
      case Stage::minimization:
        b.set("minimize", options.minimization_steps);
        break;
      case Stage::equilibration:
        thermostat(b);
        b.set("reassignFreq", output_every);
        b.set("reassignTemp", T);
        b.set("run", steps_for(options.equilibration_ns * 1e6, dt, "equilibration length"));
        break;
      case Stage::production:
        thermostat(b);
        b.set("useGroupPressure", "yes");
        b.set("useFlexibleCell", membrane ? "yes" : "no");
        b.set("useConstantArea", membrane ? "yes" : "no");
        b.set("langevinPiston", "on");
        b.set("langevinPistonTarget", options.pressure_bar);
        b.set("langevinPistonPeriod", 50.0);
        b.set("langevinPistonDecay", 25.0);
        b.set("langevinPistonTemp", T);
        b.set("run", steps_for(options.production_ns * 1e6, dt, "production length"));
        break;
    }
    c.parameters = b.take();
    out.push_back(std::move(c));
  }
  return out;
}

std::string render_config(const NamdConfig& config) {
  std::size_t width = 0;
  for (const auto& [k, v] : config.parameters) width = std::max(width, k.size());
  std::string out;
  out += "# NAMD configuration generated by namdkit\n";
  out += "# label: " + config.label + "\n";
  out += "# stage: " + std::string(to_string(config.stage)) + "\n";
  out += "\n";
  for (const auto& [k, v] : config.parameters) out += detail::pad_right(k, width + 1) + v + "\n";
  return out;
}

std::vector<Parameter> parse_config(std::string_view text) {
  std::vector<Parameter> out;
  detail::for_each_line(text, [&](std::string_view line, std::size_t) {
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') return true;
    const auto split = line.find_first_of(" \t");
    if (split == std::string_view::npos) {
      out.emplace_back(std::string(line), std::string());
    } else {
      out.emplace_back(std::string(line.substr(0, split)), std::string(detail::trim(line.substr(split))));
    }
    return true;
  });
  return out;
}

}  // namespace namdkit
