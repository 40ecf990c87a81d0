#include "namdkit/jobspec.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <set>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "namdkit/analysis/selection.hpp"
#include "namdkit/error.hpp"
#include "namdkit/io/fetch.hpp"
#include "util.hpp"

namespace namdkit {

const char* to_string(CaseType v) { return v == CaseType::solution ? "solution" : "bilayer"; }
const char* to_string(Engine) { return "namd"; }
const char* to_string(IonPlacement v) { return v == IonPlacement::mc ? "mc" : "distance"; }
const char* to_string(OrientationSource v) {
  switch (v) {
    case OrientationSource::none: return "none";
    case OrientationSource::opm: return "opm";
    case OrientationSource::pdb: return "pdb";
  }
  return "none";
}
const char* to_string(Severity s) {
  switch (s) {
    case Severity::error: return "error";
    case Severity::warning: return "warning";
    case Severity::info: return "info";
  }
  return "info";
}

void ValidationReport::add(Severity severity, std::string code, std::string message, std::string subject) {
  findings.push_back({severity, std::move(code), std::move(message), std::move(subject)});
}

void ValidationReport::merge(const ValidationReport& other) {
  findings.insert(findings.end(), other.findings.begin(), other.findings.end());
}

void ValidationReport::sort() {
  std::stable_sort(findings.begin(), findings.end(), [](const Finding& a, const Finding& b) {
    return std::tie(a.severity, a.code, a.subject, a.message) < std::tie(b.severity, b.code, b.subject, b.message);
  });
}

bool ValidationReport::passed() const { return count(Severity::error) == 0; }

std::size_t ValidationReport::count(Severity s) const {
  return static_cast<std::size_t>(std::count_if(findings.begin(), findings.end(), [s](const Finding& f) { return f.severity == s; }));
}

std::string ValidationReport::to_json() const {
  nlohmann::json j;
  j["passed"] = passed();
  j["findings"] = nlohmann::json::array();
  for (const auto& f : findings)
    j["findings"].push_back({{"severity", to_string(f.severity)}, {"code", f.code}, {"message", f.message}, {"subject", f.subject}});
  return j.dump(2) + "\n";
}

namespace {

std::string lower(std::string_view s) {
  std::string out;
  for (char c : s)
    if (c != ' ' && c != '_' && c != '-') out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

class SpecReader {
 public:
  std::vector<SchemaIssue> issues;
  std::vector<Finding> warnings;

  std::optional<std::string> string_at(const YAML::Node& node, const std::string& path) {
    if (!node.IsScalar()) {
      issues.push_back({path, "expected a string"});
      return std::nullopt;
    }
    return node.Scalar();
  }

  // Accepts plain numbers and numbers with a trailing unit ("0.15 M", "300 K").
  std::optional<double> number_at(const YAML::Node& node, const std::string& path, std::string_view unit = {}) {
    if (!node.IsScalar()) {
      issues.push_back({path, "expected a number"});
      return std::nullopt;
    }
    std::string_view text = detail::trim(node.Scalar());
    if (!unit.empty() && text.size() > unit.size()) {
      const auto tail = text.substr(text.size() - unit.size());
      if (lower(tail) == lower(unit)) text = detail::trim(text.substr(0, text.size() - unit.size()));
    }
    const auto v = detail::parse_number<double>(text);
    if (!v || !std::isfinite(*v)) {
      issues.push_back({path, "expected a number, got '" + node.Scalar() + "'"});
      return std::nullopt;
    }
    return v;
  }

  std::optional<bool> bool_at(const YAML::Node& node, const std::string& path) {
    bool v = false;
    if (!node.IsScalar() || !YAML::convert<bool>::decode(node, v)) {
      issues.push_back({path, "expected a boolean"});
      return std::nullopt;
    }
    return v;
  }

  template <typename E>
  std::optional<E> enum_at(const YAML::Node& node, const std::string& path,
                           std::initializer_list<std::pair<std::string_view, E>> names) {
    const auto s = string_at(node, path);
    if (!s) return std::nullopt;
    const auto key = lower(*s);
    for (const auto& [name, value] : names)
      if (key == name) return value;
    std::string allowed;
    for (const auto& [name, value] : names) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
    issues.push_back({path, "unknown value '" + *s + "' (expected one of " + allowed + ")"});
    return std::nullopt;
  }

  std::map<std::string, double> leaflet_at(const YAML::Node& node, const std::string& path) {
    std::map<std::string, double> out;
    if (!node.IsMap()) {
      issues.push_back({path, "expected a mapping of lipid name to ratio"});
      return out;
    }
    for (const auto& kv : node) {
      const auto name = kv.first.Scalar();
      if (auto v = number_at(kv.second, path + "." + name)) out[name] = *v;
    }
    return out;
  }

  void unknown_key(const std::string& path) {
    warnings.push_back({Severity::warning, "unknown-key", "unrecognised key '" + path + "' ignored", path});
  }
};

}  // namespace

ParsedJobSpec parse_jobspec(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ParseError("malformed YAML: " + e.msg, e.mark.is_null() ? 0 : static_cast<std::size_t>(e.mark.line + 1));
  }
  if (!root.IsMap()) throw SchemaError(std::vector<SchemaIssue>{{"", "job spec must be a YAML mapping"}});

  SpecReader r;
  ParsedJobSpec parsed;
  JobSpec& s = parsed.spec;
  bool have_label = false, have_id = false, have_file = false, have_case = false, have_temp = false;
  bool case_seen_bilayer = false;
  std::optional<YAML::Node> membrane;

  for (const auto& kv : root) {
    const std::string key = kv.first.Scalar();
    const YAML::Node& v = kv.second;
    if (key == "label") {
      if (auto x = r.string_at(v, key)) s.label = *x, have_label = true;
    } else if (key == "pdb_id") {
      if (auto x = r.string_at(v, key)) s.pdb_id = *x, have_id = true;
    } else if (key == "pdb_file") {
      if (auto x = r.string_at(v, key)) s.pdb_file = *x, have_file = true;
    } else if (key == "case_type") {
      have_case = true;
      if (auto x = r.enum_at<CaseType>(v, key, {{"solution", CaseType::solution}, {"bilayer", CaseType::bilayer}})) {
        s.case_type = *x;
        case_seen_bilayer = *x == CaseType::bilayer;
      }
    } else if (key == "engine") {
      if (auto x = r.enum_at<Engine>(v, key, {{"namd", Engine::namd}})) s.engine = *x;
    } else if (key == "temperature") {
      have_temp = true;
      if (auto x = r.number_at(v, key, "K")) s.temperature = *x;
    } else if (key == "hmr") {
      if (auto x = r.bool_at(v, key)) s.hmr = *x;
    } else if (key == "solvation") {
      if (auto x = r.bool_at(v, key)) s.solvation = *x;
    } else if (key == "periodic") {
      if (auto x = r.bool_at(v, key)) s.periodic = *x;
    } else if (key == "ion_type") {
      if (auto x = r.string_at(v, key)) s.ion_type = *x;
    } else if (key == "ion_concentration") {
      if (auto x = r.number_at(v, key, "M")) s.ion_concentration = *x;
    } else if (key == "ion_placement") {
      if (auto x = r.enum_at<IonPlacement>(v, key, {{"mc", IonPlacement::mc}, {"montecarlo", IonPlacement::mc},
                                                    {"distance", IonPlacement::distance}, {"dist", IonPlacement::distance}}))
        s.ion_placement = *x;
    } else if (key == "orientation_source") {
      if (auto x = r.enum_at<OrientationSource>(
              v, key, {{"none", OrientationSource::none}, {"opm", OrientationSource::opm}, {"pdb", OrientationSource::pdb}}))
        s.orientation_source = *x;
    } else if (key == "pore_water") {
      if (auto x = r.bool_at(v, key)) s.pore_water = *x;
    } else if (key == "force_field") {
      if (auto x = r.string_at(v, key)) s.force_field = *x;
    } else if (key == "ph") {
      if (auto x = r.number_at(v, key)) s.ph = *x;
    } else if (key == "box") {
      if (!v.IsMap()) {
        r.issues.push_back({key, "expected a mapping with a, b, c"});
        continue;
      }
      BoxSize box;
      bool ok = true;
      for (const char* axis : {"a", "b", "c"}) {
        const std::string path = std::string("box.") + axis;
        if (!v[axis]) {
          r.issues.push_back({path, "missing required key"});
          ok = false;
        } else if (auto x = r.number_at(v[axis], path)) {
          (axis[0] == 'a' ? box.a : axis[0] == 'b' ? box.b : box.c) = *x;
        } else {
          ok = false;
        }
      }
      for (const auto& sub : v) {
        const auto name = sub.first.Scalar();
        if (name != "a" && name != "b" && name != "c") r.unknown_key("box." + name);
      }
      if (ok) s.box = box;
    } else if (key == "membrane") {
      membrane.emplace(v);
    } else {
      r.unknown_key(key);
    }
  }

  if (membrane) {
    const YAML::Node& membrane_node = *membrane;
    if (!membrane_node.IsMap()) {
      r.issues.push_back({"membrane", "expected a mapping"});
    } else {
      Membrane m;
      bool complete = true;
      for (const char* part : {"upper_lipids", "lower_lipids", "xy_dim"}) {
        if (!membrane_node[part]) {
          r.issues.push_back({std::string("membrane.") + part, "missing required key"});
          complete = false;
        }
      }
      if (membrane_node["upper_lipids"]) m.upper_lipids = r.leaflet_at(membrane_node["upper_lipids"], "membrane.upper_lipids");
      if (membrane_node["lower_lipids"]) m.lower_lipids = r.leaflet_at(membrane_node["lower_lipids"], "membrane.lower_lipids");
      if (membrane_node["xy_dim"]) {
        if (auto x = r.number_at(membrane_node["xy_dim"], "membrane.xy_dim")) m.xy_dim = *x;
      }
      for (const auto& sub : membrane_node) {
        const auto name = sub.first.Scalar();
        if (name != "upper_lipids" && name != "lower_lipids" && name != "xy_dim") r.unknown_key("membrane." + name);
      }
      if (complete) s.membrane = m;
    }
  } else if (case_seen_bilayer) {
    r.issues.push_back({"membrane.xy_dim", "bilayer case requires membrane.xy_dim"});
    r.issues.push_back({"membrane.upper_lipids", "bilayer case requires membrane leaflets"});
    r.issues.push_back({"membrane.lower_lipids", "bilayer case requires membrane leaflets"});
  }

  std::vector<SchemaIssue> missing;
  if (!have_label) missing.push_back({"label", "missing required key"});
  if (!have_id && !have_file) missing.push_back({"pdb_id", "missing required key (pdb_id or pdb_file)"});
  if (!have_case) missing.push_back({"case_type", "missing required key"});
  if (!have_temp) missing.push_back({"temperature", "missing required key"});
  missing.insert(missing.end(), r.issues.begin(), r.issues.end());
  if (!missing.empty()) throw SchemaError(std::move(missing));

  parsed.warnings = std::move(r.warnings);
  return parsed;
}

ParsedJobSpec read_jobspec_file(const std::string& path) {
  const auto text = detail::read_text_file(path);
  try {
    return parse_jobspec(text);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string serialize_jobspec(const JobSpec& s) {
  YAML::Emitter out;
  auto num = [](double v) { return detail::shortest(v); };
  out << YAML::BeginMap;
  out << YAML::Key << "label" << YAML::Value << YAML::DoubleQuoted << s.label;
  if (!s.pdb_id.empty()) out << YAML::Key << "pdb_id" << YAML::Value << YAML::DoubleQuoted << s.pdb_id;
  if (!s.pdb_file.empty()) out << YAML::Key << "pdb_file" << YAML::Value << YAML::DoubleQuoted << s.pdb_file;
  out << YAML::Key << "case_type" << YAML::Value << to_string(s.case_type);
  out << YAML::Key << "engine" << YAML::Value << to_string(s.engine);
  out << YAML::Key << "temperature" << YAML::Value << num(s.temperature);
  out << YAML::Key << "hmr" << YAML::Value << s.hmr;
  out << YAML::Key << "solvation" << YAML::Value << s.solvation;
  out << YAML::Key << "periodic" << YAML::Value << s.periodic;
  out << YAML::Key << "ion_type" << YAML::Value << YAML::DoubleQuoted << s.ion_type;
  out << YAML::Key << "ion_concentration" << YAML::Value << num(s.ion_concentration);
  out << YAML::Key << "ion_placement" << YAML::Value << to_string(s.ion_placement);
  out << YAML::Key << "orientation_source" << YAML::Value << to_string(s.orientation_source);
  out << YAML::Key << "pore_water" << YAML::Value << s.pore_water;
  out << YAML::Key << "force_field" << YAML::Value << YAML::DoubleQuoted << s.force_field;
  if (s.ph) out << YAML::Key << "ph" << YAML::Value << num(*s.ph);
  if (s.box) {
    out << YAML::Key << "box" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "a" << YAML::Value << num(s.box->a);
    out << YAML::Key << "b" << YAML::Value << num(s.box->b);
    out << YAML::Key << "c" << YAML::Value << num(s.box->c);
    out << YAML::EndMap;
  }
  if (s.membrane) {
    auto leaflet = [&](const char* name, const std::map<std::string, double>& lipids) {
      out << YAML::Key << name << YAML::Value << YAML::BeginMap;
      for (const auto& [lipid, ratio] : lipids) out << YAML::Key << YAML::DoubleQuoted << lipid << YAML::Value << num(ratio);
      out << YAML::EndMap;
    };
    out << YAML::Key << "membrane" << YAML::Value << YAML::BeginMap;
    leaflet("upper_lipids", s.membrane->upper_lipids);
    leaflet("lower_lipids", s.membrane->lower_lipids);
    out << YAML::Key << "xy_dim" << YAML::Value << num(s.membrane->xy_dim);
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

namespace {

void normalize_leaflet(std::map<std::string, double>& lipids) {
  double sum = 0;
  for (const auto& [name, ratio] : lipids) sum += ratio;
  // already-normalised leaflets are left untouched so cleaning is idempotent
  if (!(sum > 0) || std::abs(sum - 1.0) <= 1e-12) return;
  for (auto& [name, ratio] : lipids) ratio /= sum;
}

}  // namespace

JobSpec clean_jobspec(JobSpec s) {
  s.label = std::string(detail::trim(s.label));
  for (auto& c : s.pdb_id) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  s.temperature = std::round(s.temperature * 100.0) / 100.0;
  if (s.membrane) {
    normalize_leaflet(s.membrane->upper_lipids);
    normalize_leaflet(s.membrane->lower_lipids);
  }
  return s;
}

bool is_standard_residue(std::string_view res_name) {
  static constexpr std::array<std::string_view, 9> kOther{"HOH", "TIP3", "TIP", "NA", "CL", "K", "MG", "CA", "ZN"};
  return analysis::is_amino_acid(res_name) || std::find(kOther.begin(), kOther.end(), res_name) != kOther.end();
}

ValidationReport preflight_structure(const Structure& s) {
  ValidationReport report;
  auto residue_subject = [](const Residue& r) { return "residue " + r.key.to_string() + " " + r.name; };

  std::set<std::string> nonstandard;
  for (const auto& res : s.residues) {
    if (!is_standard_residue(res.name)) {
      if (nonstandard.insert(res.name + "@" + res.key.to_string()).second)
        report.add(Severity::warning, "nonstandard-residue", "nonstandard residue " + res.name + " at " + res.key.to_string(),
                   residue_subject(res));
      continue;
    }
    if (!analysis::is_amino_acid(res.name)) continue;
    std::vector<std::string> missing;
    for (const char* name : {"N", "CA", "C", "O"}) {
      bool found = false;
      for (std::size_t i = res.begin; i < res.end && !found; ++i) found = s.atoms[i].name == name;
      if (!found) missing.emplace_back(name);
    }
    if (!missing.empty()) {
      std::string list;
      for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
      report.add(Severity::error, "incomplete-residue",
                 "incomplete residue " + res.name + " " + res.key.to_string() + ": missing backbone atom(s) " + list,
                 residue_subject(res));
    }
  }

  if (!s.dropped_altlocs.empty()) {
    std::set<ResidueKey> residues(s.dropped_altlocs.begin(), s.dropped_altlocs.end());
    report.add(Severity::info, "altloc-dropped",
               std::to_string(s.dropped_altlocs.size()) + " alternate-location atom(s) beyond 'A' dropped in " +
                   std::to_string(residues.size()) + " residue(s)",
               "structure");
  }

  const auto n_h = std::count_if(s.atoms.begin(), s.atoms.end(), [](const AtomRecord& a) { return a.element == "H"; });
  if (n_h > 0) report.add(Severity::info, "hydrogens-present", std::to_string(n_h) + " hydrogen atom(s) present", "structure");

  auto find_atom = [&](const Residue& r, std::string_view name) -> const AtomRecord* {
    for (std::size_t i = r.begin; i < r.end; ++i)
      if (s.atoms[i].name == name) return &s.atoms[i];
    return nullptr;
  };
  for (std::size_t k = 0; k + 1 < s.residues.size(); ++k) {
    const auto& a = s.residues[k];
    const auto& b = s.residues[k + 1];
    if (a.key.chain_id != b.key.chain_id || !analysis::is_amino_acid(a.name) || !analysis::is_amino_acid(b.name)) continue;
    const auto* c = find_atom(a, "C");
    const auto* n = find_atom(b, "N");
    if (!c || !n) continue;
    const double d = (c->position - n->position).norm();
    if (d > 2.0)
      report.add(Severity::warning, "chain-break",
                 "chain break between " + a.key.to_string() + " and " + b.key.to_string() + ": C-N distance " +
                     detail::fixed(d, 2) + " Å",
                 residue_subject(a));
  }
  report.sort();
  return report;
}

ValidationReport validate_membrane_geometry(const Structure& s, const JobSpec& spec, double margin) {
  ValidationReport report;
  if (spec.case_type != CaseType::bilayer || !spec.membrane) return report;

  std::vector<const AtomRecord*> protein;
  for (const auto& a : s.atoms)
    if (analysis::is_amino_acid(a.res_name)) protein.push_back(&a);
  if (protein.empty()) {
    report.add(Severity::info, "no-protein-atoms", "no amino-acid residues found; membrane extent uses all atoms", "structure");
    for (const auto& a : s.atoms) protein.push_back(&a);
  }
  double lo_x = protein[0]->position.x(), hi_x = lo_x, lo_y = protein[0]->position.y(), hi_y = lo_y;
  for (const auto* a : protein) {
    lo_x = std::min(lo_x, a->position.x());
    hi_x = std::max(hi_x, a->position.x());
    lo_y = std::min(lo_y, a->position.y());
    hi_y = std::max(hi_y, a->position.y());
  }
  const double extent = std::max(hi_x - lo_x, hi_y - lo_y);
  const double required = extent + margin;
  const double xy = spec.membrane->xy_dim;
  if (xy < required)
    report.add(Severity::error, "membrane-too-small",
               "membrane XY dimension " + detail::shortest(xy) + " Å is too small: protein extent " + detail::fixed(extent, 2) +
                   " Å + margin " + detail::shortest(margin) + " Å requires at least " + detail::fixed(required, 2) + " Å",
               "membrane.xy_dim");
  report.sort();
  return report;
}

ValidationReport validate_jobspec(const JobSpec& spec, const Structure* structure, double margin) {
  ValidationReport report;
  if (!(spec.temperature > 0.0 && spec.temperature <= 1000.0))
    report.add(Severity::error, "temperature-range",
               "temperature " + detail::shortest(spec.temperature) + " K outside (0, 1000] K", "temperature");
  if (!(spec.ion_concentration >= 0.0 && spec.ion_concentration <= 10.0))
    report.add(Severity::error, "ion-concentration-range",
               "ion concentration " + detail::shortest(spec.ion_concentration) + " M outside [0, 10] M", "ion_concentration");
  if (!spec.pdb_id.empty() && !is_valid_pdb_id(spec.pdb_id))
    report.add(Severity::error, "pdb-id", "'" + spec.pdb_id + "' is not a valid 4-character PDB ID", "pdb_id");
  if (detail::trim(spec.label).empty()) report.add(Severity::error, "label-empty", "label is empty", "label");
  if (spec.box && !(spec.box->a > 0 && spec.box->b > 0 && spec.box->c > 0))
    report.add(Severity::error, "box-size", "box lengths must be positive", "box");

  if (spec.case_type == CaseType::bilayer) {
    if (!spec.membrane) {
      report.add(Severity::error, "membrane-missing", "bilayer case requires a membrane block", "membrane");
    } else {
      const auto& m = *spec.membrane;
      if (!(m.xy_dim > 0)) report.add(Severity::error, "membrane-xy", "membrane.xy_dim must be positive", "membrane.xy_dim");
      for (const auto& [name, leaflet] : {std::pair{"membrane.upper_lipids", &m.upper_lipids},
                                          std::pair{"membrane.lower_lipids", &m.lower_lipids}}) {
        if (leaflet->empty()) report.add(Severity::error, "leaflet-empty", std::string(name) + " is empty", name);
        for (const auto& [lipid, ratio] : *leaflet)
          if (!(ratio > 0))
            report.add(Severity::error, "leaflet-ratio", "lipid " + lipid + " ratio must be positive", std::string(name) + "." + lipid);
      }
    }
  } else if (spec.membrane) {
    report.add(Severity::warning, "membrane-ignored", "membrane block is ignored for a solution case", "membrane");
  }
  if (spec.pore_water && spec.case_type != CaseType::bilayer)
    report.add(Severity::info, "pore-water-ignored", "pore_water only applies to bilayer cases", "pore_water");

  if (structure) {
    report.merge(preflight_structure(*structure));
    if (spec.case_type == CaseType::bilayer && spec.membrane && spec.membrane->xy_dim > 0)
      report.merge(validate_membrane_geometry(*structure, spec, margin));
  }
  report.sort();
  return report;
}

}  // namespace namdkit
