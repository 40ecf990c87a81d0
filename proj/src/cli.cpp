#include "namdkit/cli.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "namdkit/analysis/drift.hpp"
#include "namdkit/analysis/fes.hpp"
#include "namdkit/analysis/hbonds.hpp"
#include "namdkit/analysis/sasa.hpp"
#include "namdkit/analysis/selection.hpp"
#include "namdkit/analysis/structural.hpp"
#include "namdkit/error.hpp"
#include "namdkit/io/dcd.hpp"
#include "namdkit/io/fetch.hpp"
#include "namdkit/io/namd_log.hpp"
#include "namdkit/io/pdb.hpp"
#include "namdkit/io/psf.hpp"
#include "namdkit/jobspec.hpp"
#include "namdkit/namd_config.hpp"
#include "namdkit/report.hpp"
#include "util.hpp"

#ifndef NAMDKIT_VERSION
#define NAMDKIT_VERSION "0.0.0"
#endif

namespace namdkit::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Outputs = std::map<std::string, std::string>;

namespace {

// ---------------------------------------------------------------- run layout

struct RunDir {
  fs::path root;
  fs::path inputs() const { return root / "inputs"; }
  fs::path configs() const { return root / "configs"; }
  fs::path analysis() const { return root / "analysis"; }
  fs::path plots() const { return root / "plots"; }
  fs::path manifest() const { return root / "manifest.json"; }

  std::string rel(const fs::path& p) const { return p.lexically_relative(root).generic_string(); }
};

RunDir make_run_dir(const fs::path& out, std::string_view label) {
  RunDir d{out / sanitize_file_stem(label)};
  for (const auto& p : {d.root, d.inputs(), d.configs(), d.analysis(), d.plots()}) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw IoError("cannot create directory '" + p.string() + "': " + ec.message());
  }
  return d;
}

// One writer per run directory at a time.
class RunLock {
 public:
  explicit RunLock(const RunDir& dir) : path_(dir.root / ".lock") {
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
      throw IoError("run directory '" + dir.root.string() + "' is locked by another namdkit process (remove '" +
                    path_.string() + "' if stale)");
    const auto pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
  }
  ~RunLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  fs::path path_;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

report::RunManifest load_manifest(const RunDir& dir) {
  report::RunManifest m;
  if (!fs::exists(dir.manifest())) return m;
  try {
    const auto j = json::parse(detail::read_text_file(dir.manifest().string()));
    m.spec_label = j.value("spec_label", "");
    m.input_hashes = j.value("input_hashes", std::map<std::string, std::string>{});
    m.commands_run = j.value("commands_run", std::vector<std::string>{});
    m.outputs = j.value("outputs", std::map<std::string, std::string>{});
  } catch (const json::exception& e) {
    throw ParseError(dir.manifest().string() + ": " + e.what());
  }
  return m;
}

struct ManifestUpdate {
  std::string label;
  std::vector<std::string> commands;
  Outputs outputs;
  std::map<std::string, std::string> input_hashes;
};

void write_manifest(const RunDir& dir, const ManifestUpdate& u, bool fresh) {
  auto m = fresh ? report::RunManifest{} : load_manifest(dir);
  m.spec_label = u.label;
  m.commands_run.insert(m.commands_run.end(), u.commands.begin(), u.commands.end());
  for (const auto& [k, v] : u.outputs) m.outputs[k] = v;
  for (const auto& [k, v] : u.input_hashes) m.input_hashes[k] = v;
  m.tool_version = NAMDKIT_VERSION;
  m.generated_at = utc_now();
  report::write_text_file(dir.manifest(), report::manifest_json(m, dir.root));
}

fs::path cache_dir() {
  if (const char* env = std::getenv(kCacheEnv); env && *env) return env;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return fs::path(xdg) / "namdkit";
  if (const char* home = std::getenv("HOME"); home && *home) return fs::path(home) / ".cache" / "namdkit";
  return ".namdkit-cache";
}

void write_json(const fs::path& path, const json& j) { report::write_text_file(path, j.dump(2) + "\n"); }

void print_findings(std::ostream& out, const ValidationReport& r) {
  for (const auto& f : r.findings)
    out << to_string(f.severity) << " [" << f.code << "] " << f.message << (f.subject.empty() ? "" : " (" + f.subject + ")")
        << "\n";
  out << (r.passed() ? "validation passed" : "validation failed") << ": " << r.count(Severity::error) << " error(s), "
      << r.count(Severity::warning) << " warning(s), " << r.count(Severity::info) << " info\n";
}

// ------------------------------------------------------------------ job spec

JobSpec load_spec(const std::string& path, std::ostream& out) {
  auto parsed = read_jobspec_file(path);
  for (const auto& w : parsed.warnings) out << path << ": warning [" << w.code << "] " << w.message << "\n";
  return clean_jobspec(parsed.spec);
}

/// Structure used for spec validation: explicit path, the spec's pdb_file
/// (relative to the spec), a cached download, or a fresh download when
/// fetching is allowed.
std::optional<fs::path> locate_structure(const JobSpec& spec, const std::string& spec_path, const std::string& explicit_pdb,
                                         bool allow_fetch) {
  if (!explicit_pdb.empty()) return fs::path(explicit_pdb);
  if (!spec.pdb_file.empty()) {
    fs::path p(spec.pdb_file);
    if (p.is_relative()) p = fs::path(spec_path).parent_path() / p;
    return p;
  }
  if (!spec.pdb_id.empty() && is_valid_pdb_id(spec.pdb_id)) {
    const auto cached = pdb_cache_path(cache_dir(), spec.pdb_id);
    if (fs::exists(cached)) return cached;
    if (allow_fetch) return fetch_to_cache(spec.pdb_id, cache_dir());
  }
  return std::nullopt;
}

ValidationReport validate_with_structure(const JobSpec& spec, const std::optional<fs::path>& pdb, double margin) {
  if (!pdb) {
    auto r = validate_jobspec(spec, nullptr, margin);
    r.add(Severity::info, "structure-unavailable", "no structure available offline; structure checks skipped", "structure");
    r.sort();
    return r;
  }
  const auto s = read_pdb_file(pdb->string());
  return validate_jobspec(spec, &s, margin);
}

// ------------------------------------------------------------------ analysis

struct MetricFlags {
  bool rmsd = false, rmsf = false, rg = false, sasa = false, hbonds = false, energy = false, fes = false, all = false;

  void expand() {
    if (all) rmsd = rmsf = rg = sasa = hbonds = energy = fes = true;
  }
  bool any() const { return rmsd || rmsf || rg || sasa || hbonds || energy || fes; }
  std::string names() const {
    std::string out;
    auto add = [&](bool on, const char* n) {
      if (on) out += (out.empty() ? "" : ",") + std::string(n);
    };
    add(rmsd, "rmsd");
    add(rmsf, "rmsf");
    add(rg, "rg");
    add(sasa, "sasa");
    add(hbonds, "hbonds");
    add(energy, "energy");
    add(fes, "fes");
    return out;
  }
};

struct AnalyzeOptions {
  std::string pdb, psf, dcd, log;
  MetricFlags metrics;
  std::string selection = "ca";
  std::string rg_selection = "protein";
  std::string sasa_selection = "protein";
  std::string hbond_selection = "protein";
  std::string reference = "first";
  std::optional<double> ns_per_frame;
  unsigned threads = 0;
  int fes_bins = 30;
  int sphere_points = analysis::kDefaultSpherePoints;
  double probe = analysis::kDefaultProbeRadius;
  std::optional<std::size_t> max_lag;
  bool min_image = false;
};

analysis::Selection resolve_selection(const Structure& s, const std::string& expr, const char* purpose) {
  auto sel = analysis::select(s, expr);
  if (sel.empty()) throw DomainError(std::string("selection '") + expr + "' for " + purpose + " matched no atoms");
  return sel;
}

json series_stats(const analysis::TimeSeries& ts) {
  if (ts.points.empty()) return json::object();
  double sum = 0, lo = ts.points[0].value, hi = lo;
  for (const auto& p : ts.points) {
    sum += p.value;
    lo = std::min(lo, p.value);
    hi = std::max(hi, p.value);
  }
  return {{"points", ts.points.size()},
          {"mean", sum / static_cast<double>(ts.points.size())},
          {"min", lo},
          {"max", hi},
          {"final", ts.points.back().value}};
}

Outputs run_analysis(const AnalyzeOptions& opt, const RunDir& dir, const std::string& label, std::ostream& out) {
  MetricFlags m = opt.metrics;
  m.expand();
  if (!m.any()) throw DomainError("no metrics requested (use --rmsd, --rmsf, --rg, --sasa, --hbonds, --energy, --fes or --all)");
  if (opt.pdb.empty()) throw DomainError("analyze needs --pdb for atom names, residues and elements");

  Outputs outputs;
  json summary;
  json warnings = json::array();
  summary["label"] = label;
  summary["metrics"] = json::object();
  const analysis::Parallelism par{opt.threads};
  auto emit_csv = [&](const std::string& key, const auto& value) {
    const auto path = dir.analysis() / (key + ".csv");
    report::write_csv(value, path);
    outputs["csv:" + key] = dir.rel(path);
  };

  const Structure structure = read_pdb_file(opt.pdb);
  std::optional<Topology> psf;
  if (!opt.psf.empty()) {
    psf = read_psf_file(opt.psf);
    if (psf->size() != structure.size())
      throw DomainError(opt.psf + ": " + std::to_string(psf->size()) + " atoms but " + opt.pdb + " has " +
                        std::to_string(structure.size()));
  }
  const std::vector<double> masses = psf ? psf->masses : structure.masses();

  const bool needs_traj = m.rmsd || m.rmsf || m.rg || m.sasa || m.hbonds || m.fes;
  DcdTrajectory traj;
  double ns_per_frame_value = 0.01;
  std::string ns_source = "default";
  if (needs_traj) {
    if (opt.dcd.empty()) throw DomainError("trajectory metrics need --dcd");
    traj = read_dcd_file(opt.dcd);
    if (static_cast<std::size_t>(traj.header.n_atoms) != structure.size())
      throw DomainError(opt.dcd + ": " + std::to_string(traj.header.n_atoms) + " atoms but " + opt.pdb + " has " +
                        std::to_string(structure.size()));
    if (traj.frames.empty()) throw DomainError(opt.dcd + ": trajectory has no frames");
    if (const auto h = ns_per_frame(traj.header); h && *h > 0) {
      ns_per_frame_value = *h;
      ns_source = "dcd-header";
    }
  }
  if (opt.ns_per_frame) {
    if (!(*opt.ns_per_frame > 0)) throw DomainError("--ns-per-frame must be positive");
    ns_per_frame_value = *opt.ns_per_frame;
    ns_source = "flag";
  }
  const FramesView frames(traj.frames);
  summary["n_atoms"] = structure.size();
  summary["n_frames"] = traj.frames.size();
  summary["ns_per_frame"] = ns_per_frame_value;
  summary["ns_per_frame_source"] = ns_source;
  summary["selections"] = json::object();

  std::optional<analysis::TimeSeries> rmsd, rg;
  if (m.rmsd || m.fes) {
    const auto sel = resolve_selection(structure, opt.selection, "RMSD");
    summary["selections"]["rmsd"] = {{"expression", opt.selection}, {"atoms", sel.size()}};
    Coords reference_coords;
    if (opt.reference == "first")
      reference_coords = traj.frames.front().coords;
    else if (opt.reference == "pdb")
      reference_coords = structure.coordinates();
    else
      throw DomainError("--reference must be 'first' or 'pdb'");
    rmsd = analysis::rmsd_series(frames, reference_coords, sel, true, par);
    if (m.rmsd) {
      emit_csv("rmsd", *rmsd);
      summary["metrics"]["rmsd"] = series_stats(*rmsd);
      analysis::DriftOptions dopt;
      dopt.ns_per_frame = ns_per_frame_value;
      try {
        const auto d = analysis::drift_check(*rmsd, dopt);
        summary["drift"] = {{"verdict", analysis::to_string(d.verdict)}, {"slope_A_per_ns", d.slope},
                            {"mean_level_A", d.mean_level}, {"window_points", d.window_points}, {"reason", d.reason}};
        out << "RMSD drift check: " << analysis::to_string(d.verdict) << " (" << d.reason << ")\n";
      } catch (const InsufficientDataError& e) {
        summary["drift"] = {{"verdict", "insufficient-data"}, {"reason", e.what()}};
      }
    }
  }
  if (m.rmsf) {
    const auto sel = resolve_selection(structure, opt.selection, "RMSF");
    summary["selections"]["rmsf"] = {{"expression", opt.selection}, {"atoms", sel.size()}};
    if (traj.frames.size() < 2) {
      warnings.push_back("RMSF skipped: needs at least two frames");
    } else {
      const auto r = analysis::rmsf(frames, structure, sel, {}, par);
      emit_csv("rmsf", r);
      emit_csv("bfactor", analysis::rmsf_to_bfactor(r));
      double mean = 0;
      for (double v : r.values) mean += v;
      summary["metrics"]["rmsf"] = {{"atoms", r.values.size()}, {"mean", mean / static_cast<double>(r.values.size())}};
    }
  }
  if (m.rg || m.fes) {
    const auto sel = resolve_selection(structure, opt.rg_selection, "radius of gyration");
    summary["selections"]["rg"] = {{"expression", opt.rg_selection}, {"atoms", sel.size()}};
    rg = analysis::radius_of_gyration_series(frames, sel, masses, par);
    if (m.rg) {
      emit_csv("rg", *rg);
      summary["metrics"]["rg"] = series_stats(*rg);
    }
  }
  if (m.fes) {
    const auto grid = analysis::free_energy_surface(*rg, *rmsd, opt.fes_bins);
    emit_csv("fes", grid);
    std::size_t occupied = 0;
    for (bool b : grid.occupied_mask) occupied += b ? 1 : 0;
    summary["metrics"]["fes"] = {{"bins", opt.fes_bins}, {"occupied_cells", occupied}};
  }
  if (m.sasa) {
    const auto sel = resolve_selection(structure, opt.sasa_selection, "SASA");
    summary["selections"]["sasa"] = {{"expression", opt.sasa_selection}, {"atoms", sel.size()}};
    const auto atoms = analysis::sasa_atoms(structure, sel, {}, psf ? &*psf : nullptr);
    for (const auto& w : atoms.warnings) warnings.push_back(w);
    const auto s = analysis::sasa_series(frames, sel, atoms, opt.probe, opt.sphere_points, par);
    emit_csv("sasa", s.total);
    emit_csv("sasa_polar", s.polar);
    emit_csv("sasa_apolar", s.apolar);
    summary["metrics"]["sasa"] = series_stats(s.total);
  }
  if (m.hbonds) {
    Topology topo = psf ? *psf : topology_from_structure(structure);
    const auto sel = analysis::select(structure, opt.hbond_selection);
    summary["selections"]["hbonds"] = {{"expression", opt.hbond_selection}, {"atoms", sel.size()}};
    std::vector<bool> in_sel(structure.size(), false);
    for (auto i : sel.atom_indices) in_sel[i] = true;
    std::erase_if(topo.donors, [&](const AtomPair& p) { return !in_sel[p.first] || !in_sel[p.second]; });
    std::erase_if(topo.acceptors, [&](std::size_t a) { return !in_sel[a]; });

    analysis::HBondOptions hopt;
    hopt.use_min_image = opt.min_image;
    const auto timeline = analysis::hbond_timeline(frames, topo, hopt, par);
    analysis::TimeSeries counts{"H-bonds", "count", {}};
    for (std::size_t f = 0; f < timeline.frame_indices.size(); ++f)
      counts.points.push_back({timeline.frame_indices[f], static_cast<double>(timeline.counts_per_frame[f])});
    emit_csv("hbonds", counts);
    summary["metrics"]["hbonds"] = series_stats(counts);
    summary["metrics"]["hbonds"]["distinct_bonds"] = timeline.triples.size();

    std::string persistence = "donor,hydrogen,acceptor,donor_residue,acceptor_residue,occupancy\n";
    auto residue_text = [&](std::size_t atom) {
      const auto& a = structure.atoms[atom];
      return a.res_name + " " + ResidueKey{a.chain_id, a.res_seq, a.insertion_code}.to_string() + " " + a.name;
    };
    for (const auto& o : analysis::hbond_persistence(timeline))
      persistence += std::to_string(o.triple.donor) + "," + std::to_string(o.triple.hydrogen) + "," +
                     std::to_string(o.triple.acceptor) + "," + residue_text(o.triple.donor) + "," +
                     residue_text(o.triple.acceptor) + "," + detail::shortest(o.occupancy) + "\n";
    const auto ppath = dir.analysis() / "hbond_persistence.csv";
    report::write_text_file(ppath, persistence);
    outputs["csv:hbond_persistence"] = dir.rel(ppath);

    const std::size_t n_frames = timeline.frame_indices.size();
    if (n_frames < 2) {
      warnings.push_back("H-bond autocorrelation skipped: needs at least two frames");
    } else {
      const std::size_t lag = std::min(opt.max_lag.value_or(50), n_frames - 1);
      const auto corr = analysis::hbond_autocorrelation(timeline, lag);
      for (const auto& w : corr.warnings) warnings.push_back(w);
      if (!corr.series.points.empty()) emit_csv("hbond_autocorrelation", corr.series);
    }
  }
  if (m.energy) {
    if (opt.log.empty()) {
      if (!opt.metrics.all) throw DomainError("--energy needs --log with a NAMD log file");
      warnings.push_back("energy skipped: no --log given");
    } else {
      const auto table = read_namd_log_file(opt.log);
      emit_csv("energy", table);
      for (const auto& e : table.row_errors) warnings.push_back(opt.log + ": line " + std::to_string(e.line) + ": " + e.message);
      for (const auto& w : table.warnings) warnings.push_back(opt.log + ": " + w);
      const char* column = table.column_index("POTENTIAL") ? "POTENTIAL" : table.column_index("TOTAL") ? "TOTAL" : nullptr;
      if (column && !table.rows.empty()) {
        analysis::TimeSeries potential{column == std::string_view("POTENTIAL") ? "Potential energy" : "Total energy",
                                       "kcal/mol", {}};
        const auto values = table.column(column);
        for (std::size_t i = 0; i < values.size(); ++i) potential.points.push_back({table.rows[i].timestep, values[i]});
        emit_csv("energy_potential", potential);
        summary["metrics"]["energy"] = series_stats(potential);
      }
    }
  }

  summary["warnings"] = warnings;
  const auto spath = dir.analysis() / "summary.json";
  write_json(spath, summary);
  outputs["summary"] = dir.rel(spath);
  for (const auto& w : warnings) out << "warning: " << w.get<std::string>() << "\n";
  out << "analysis written to " << dir.analysis().string() << "\n";
  return outputs;
}

// -------------------------------------------------------------------- report

// Per-atom CSVs plot their last column against the atom index.
analysis::TimeSeries read_per_atom_csv(const fs::path& path) {
  const auto text = detail::read_text_file(path.string());
  analysis::TimeSeries ts;
  detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (line.empty()) return true;
    const auto last = line.rfind(',');
    if (line_no == 1) {
      const std::string label(line.substr(last + 1));
      const auto open = label.rfind(" (");
      ts.name = open == std::string::npos ? label : label.substr(0, open);
      ts.unit = open == std::string::npos ? "" : label.substr(open + 2, label.size() - open - 3);
      return true;
    }
    const auto idx = detail::parse_number<std::int64_t>(line.substr(0, line.find(',')));
    const auto val = detail::parse_number<double>(line.substr(last + 1));
    if (!idx || !val) throw ParseError(path.string() + ": malformed row", line_no);
    ts.points.push_back({*idx, *val});
    return true;
  });
  return ts;
}

Outputs run_report(const RunDir& dir, std::ostream& out) {
  Outputs outputs;
  double ns = 0.01;
  if (const auto sp = dir.analysis() / "summary.json"; fs::exists(sp)) {
    const auto j = json::parse(detail::read_text_file(sp.string()), nullptr, false);
    if (!j.is_discarded() && j.contains("ns_per_frame")) ns = j["ns_per_frame"].get<double>();
  }
  enum class Axis { time, lag, atom, timestep };
  struct Plot {
    const char* key;
    const char* title;
    Axis axis;
  };
  static constexpr Plot kPlots[] = {
      {"rmsd", "RMSD", Axis::time},
      {"rg", "Radius of gyration", Axis::time},
      {"sasa", "Solvent accessible surface area", Axis::time},
      {"sasa_polar", "Polar SASA", Axis::time},
      {"sasa_apolar", "Apolar SASA", Axis::time},
      {"hbonds", "Hydrogen bonds", Axis::time},
      {"hbond_autocorrelation", "H-bond time correlation", Axis::lag},
      {"energy_potential", "Energy", Axis::timestep},
      {"rmsf", "RMSF", Axis::atom},
      {"bfactor", "B-factor from RMSF", Axis::atom},
  };
  for (const auto& p : kPlots) {
    const auto csv = dir.analysis() / (std::string(p.key) + ".csv");
    if (!fs::exists(csv)) continue;
    const auto series = p.axis == Axis::atom ? read_per_atom_csv(csv) : report::read_series_csv_file(csv);
    if (series.points.empty()) continue;
    report::PlotStyle style;
    style.title = p.title;
    switch (p.axis) {
      case Axis::time: style.x_label = "time", style.x_unit = "ns", style.x_scale = ns; break;
      case Axis::lag: style.x_label = "lag", style.x_unit = "ns", style.x_scale = ns; break;
      case Axis::atom: style.x_label = "atom index"; break;
      case Axis::timestep: style.x_label = "timestep"; break;
    }
    const auto svg = dir.plots() / (std::string(p.key) + ".svg");
    report::write_text_file(svg, report::render_svg(series, style));
    outputs["svg:" + std::string(p.key)] = dir.rel(svg);
  }
  if (const auto csv = dir.analysis() / "fes.csv"; fs::exists(csv)) {
    const auto grid = report::read_fes_csv(detail::read_text_file(csv.string()));
    report::PlotStyle style;
    style.title = "Free-energy surface";
    const auto svg = dir.plots() / "fes.svg";
    report::write_text_file(svg, report::render_svg(grid, style));
    outputs["svg:fes"] = dir.rel(svg);
  }
  out << outputs.size() << " plot(s) written to " << dir.plots().string() << "\n";
  return outputs;
}

// --------------------------------------------------------------- generation

Outputs write_configs(const JobSpec& spec, const InputPaths& paths, const RunDir& dir, std::ostream& out) {
  Outputs outputs;
  for (const auto& c : generate_configs(spec, paths)) {
    const auto path = dir.configs() / config_file_name(c);
    report::write_text_file(path, render_config(c));
    outputs[std::string("config:") + to_string(c.stage)] = dir.rel(path);
    out << "wrote " << path.string() << "\n";
  }
  return outputs;
}

std::map<std::string, std::string> hash_inputs(const std::vector<std::string>& files) {
  std::map<std::string, std::string> out;
  for (const auto& f : files)
    if (!f.empty()) out[fs::path(f).filename().string()] = report::sha256_file(f);
  return out;
}

/// Copies a file into the run's inputs directory; returns its path relative
/// to the configs directory, where NAMD is expected to run.
std::string stage_input(const RunDir& dir, const std::string& file) {
  const auto dest = dir.inputs() / fs::path(file).filename();
  std::error_code ec;
  if (!fs::equivalent(file, dest, ec)) {
    fs::copy_file(file, dest, fs::copy_options::overwrite_existing, ec);
    if (ec) throw IoError("cannot copy '" + file + "' to '" + dest.string() + "': " + ec.message());
  }
  return "../inputs/" + dest.filename().generic_string();
}

// ------------------------------------------------------------------ commands

struct CommonPaths {
  std::string psf, pdb, xsc;
  std::vector<std::string> params;
};

void add_analysis_options(CLI::App* sub, AnalyzeOptions& o) {
  sub->add_flag("--rmsd", o.metrics.rmsd, "RMSD against the first frame");
  sub->add_flag("--rmsf", o.metrics.rmsf, "per-atom RMSF and B-factors");
  sub->add_flag("--rg", o.metrics.rg, "radius of gyration");
  sub->add_flag("--sasa", o.metrics.sasa, "solvent accessible surface area");
  sub->add_flag("--hbonds", o.metrics.hbonds, "hydrogen bonds, persistence and time correlation");
  sub->add_flag("--energy", o.metrics.energy, "energy profile from a NAMD log");
  sub->add_flag("--fes", o.metrics.fes, "free-energy surface over Rg and RMSD");
  sub->add_flag("--all", o.metrics.all, "every metric");
  sub->add_option("--selection", o.selection, "atoms for RMSD/RMSF (all, protein, ca, backbone, heavy, 'index A-B')")
      ->capture_default_str();
  sub->add_option("--rg-selection", o.rg_selection, "atoms for the radius of gyration")->capture_default_str();
  sub->add_option("--sasa-selection", o.sasa_selection, "atoms for SASA")->capture_default_str();
  sub->add_option("--hbond-selection", o.hbond_selection, "atoms considered for hydrogen bonds")->capture_default_str();
  sub->add_option("--reference", o.reference, "RMSD reference: first (trajectory frame) or pdb")->capture_default_str();
  sub->add_option("--ns-per-frame", o.ns_per_frame, "override the frame spacing from the DCD header");
  sub->add_option("--threads", o.threads, "worker threads, 0 = all cores")->capture_default_str();
  sub->add_option("--fes-bins", o.fes_bins, "bins per free-energy axis")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--sphere-points", o.sphere_points, "SASA points per atom")->capture_default_str()->check(CLI::Range(12, 100000));
  sub->add_option("--probe", o.probe, "SASA probe radius (Å)")->capture_default_str();
  sub->add_option("--max-lag", o.max_lag, "largest lag for the H-bond correlation (frames, default 50)");
  sub->add_flag("--min-image", o.min_image, "use the minimum image for H-bonds (needs unit cells in the DCD)");
  sub->add_option("--dcd", o.dcd, "trajectory");
  sub->add_option("--log", o.log, "NAMD log for the energy profile");
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Job specs, NAMD inputs and trajectory analysis for protein MD runs", "namdkit"};
  app.set_version_flag("--version", NAMDKIT_VERSION);
  app.require_subcommand(1);

  // fetch
  std::string fetch_id, fetch_cache;
  auto* fetch = app.add_subcommand("fetch", "download a PDB entry into the cache");
  fetch->add_option("pdb_id", fetch_id, "4-character PDB ID")->required();
  fetch->add_option("--cache", fetch_cache, std::string("cache directory (default $") + kCacheEnv + ")");

  // preflight
  std::string pre_pdb, pre_out;
  auto* preflight = app.add_subcommand("preflight", "report structure problems without changing the structure");
  preflight->add_option("pdb", pre_pdb, "structure file")->required()->check(CLI::ExistingFile);
  preflight->add_option("--json", pre_out, "also write the report as JSON to this file");

  // validate
  std::string val_spec, val_pdb, val_out;
  double margin = kDefaultMembraneMargin;
  auto* validate = app.add_subcommand("validate", "check a job spec and its structure");
  validate->add_option("spec", val_spec, "YAML job spec")->required()->check(CLI::ExistingFile);
  validate->add_option("--pdb", val_pdb, "structure to check (default: from the spec or the cache)");
  validate->add_option("--margin", margin, "membrane clearance in Å added to the protein extent")->capture_default_str();
  validate->add_option("--out", val_out, "output root; writes <out>/<label>/validation.json");

  // gen-namd
  std::string gen_spec, gen_out = "runs";
  CommonPaths gen_paths;
  auto* gen = app.add_subcommand("gen-namd", "write minimization, equilibration and production configs");
  gen->add_option("spec", gen_spec, "YAML job spec")->required()->check(CLI::ExistingFile);
  gen->add_option("--psf", gen_paths.psf, "system PSF")->required();
  gen->add_option("--pdb", gen_paths.pdb, "system coordinates")->required();
  gen->add_option("--param", gen_paths.params, "force-field parameter file (repeatable)")->required();
  gen->add_option("--xsc", gen_paths.xsc, "extended-system file carrying the periodic cell");
  gen->add_option("--out", gen_out, "output root")->capture_default_str();

  // analyze
  AnalyzeOptions an;
  std::string an_out = "runs", an_label;
  auto* analyze = app.add_subcommand("analyze", "compute trajectory analyses into CSV files");
  analyze->add_option("--pdb", an.pdb, "structure matching the trajectory")->required();
  analyze->add_option("--psf", an.psf, "topology (masses and bonds)");
  analyze->add_option("--out", an_out, "output root")->capture_default_str();
  analyze->add_option("--label", an_label, "run label (default: PDB file stem)");
  add_analysis_options(analyze, an);

  // report
  std::string rep_out = "runs", rep_label;
  auto* rep = app.add_subcommand("report", "render SVG plots from analysis CSVs");
  rep->add_option("--out", rep_out, "output root")->capture_default_str();
  rep->add_option("--label", rep_label, "run label")->required();

  // pipeline
  std::string pipe_spec, pipe_out = "runs";
  CommonPaths pipe_paths;
  AnalyzeOptions pipe_an;
  bool pipe_fetch = false;
  auto* pipeline = app.add_subcommand("pipeline", "validate, generate configs, analyze and report in one run");
  pipeline->add_option("spec", pipe_spec, "YAML job spec")->required()->check(CLI::ExistingFile);
  pipeline->add_option("--psf", pipe_paths.psf, "system PSF");
  pipeline->add_option("--pdb", pipe_paths.pdb, "system coordinates (default: from the spec or the cache)");
  pipeline->add_option("--param", pipe_paths.params, "force-field parameter file (repeatable)");
  pipeline->add_option("--xsc", pipe_paths.xsc, "extended-system file carrying the periodic cell");
  pipeline->add_option("--out", pipe_out, "output root")->capture_default_str();
  pipeline->add_option("--margin", margin, "membrane clearance in Å")->capture_default_str();
  pipeline->add_flag("--fetch", pipe_fetch, "allow downloading the spec's PDB entry");
  add_analysis_options(pipeline, pipe_an);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help(e.get_name() == "--help" ? "" : "");
    for (auto* sub : app.get_subcommands()) out << sub->help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << NAMDKIT_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitFailure;
  }

  if (fetch->parsed()) {
    const fs::path dir = fetch_cache.empty() ? cache_dir() : fs::path(fetch_cache);
    if (!is_valid_pdb_id(fetch_id)) throw DomainError("'" + fetch_id + "' is not a valid PDB ID");
    out << fetch_to_cache(fetch_id, dir).string() << "\n";
    return kExitOk;
  }

  if (preflight->parsed()) {
    const auto s = read_pdb_file(pre_pdb);
    const auto r = preflight_structure(s);
    print_findings(out, r);
    if (!pre_out.empty()) report::write_text_file(pre_out, r.to_json());
    return r.passed() ? kExitOk : kExitRejected;
  }

  if (validate->parsed()) {
    const auto spec = load_spec(val_spec, out);
    const auto report = validate_with_structure(spec, locate_structure(spec, val_spec, val_pdb, false), margin);
    print_findings(out, report);
    if (!val_out.empty()) {
      const auto dir = make_run_dir(val_out, spec.label);
      RunLock lock(dir);
      const auto path = dir.root / "validation.json";
      report::write_text_file(path, report.to_json());
      write_manifest(dir, {spec.label, {"validate"}, {{"validation", dir.rel(path)}}, hash_inputs({val_spec, val_pdb})},
                     false);
    }
    return report.passed() ? kExitOk : kExitRejected;
  }

  if (gen->parsed()) {
    const auto spec = load_spec(gen_spec, out);
    const auto report = validate_with_structure(spec, fs::path(gen_paths.pdb), kDefaultMembraneMargin);
    if (!report.passed()) {
      print_findings(err, report);
      return kExitRejected;
    }
    const auto dir = make_run_dir(gen_out, spec.label);
    RunLock lock(dir);
    InputPaths paths{gen_paths.psf, gen_paths.pdb, gen_paths.params, std::nullopt};
    if (!gen_paths.xsc.empty()) paths.extended_system = gen_paths.xsc;
    auto outputs = write_configs(spec, paths, dir, out);
    std::vector<std::string> inputs{gen_spec, gen_paths.psf, gen_paths.pdb, gen_paths.xsc};
    inputs.insert(inputs.end(), gen_paths.params.begin(), gen_paths.params.end());
    write_manifest(dir, {spec.label, {"gen-namd"}, outputs, hash_inputs(inputs)}, false);
    return kExitOk;
  }

  if (analyze->parsed()) {
    const std::string label = an_label.empty() ? fs::path(an.pdb).stem().string() : an_label;
    const auto dir = make_run_dir(an_out, label);
    RunLock lock(dir);
    auto outputs = run_analysis(an, dir, label, out);
    auto m = an.metrics;
    m.expand();
    write_manifest(dir, {label, {"analyze " + m.names()}, outputs, hash_inputs({an.pdb, an.psf, an.dcd, an.log})}, false);
    return kExitOk;
  }

  if (rep->parsed()) {
    const RunDir dir{fs::path(rep_out) / sanitize_file_stem(rep_label)};
    if (!fs::exists(dir.analysis())) throw IoError("no analysis directory at '" + dir.analysis().string() + "'");
    const auto made = make_run_dir(rep_out, rep_label);
    RunLock lock(made);
    auto outputs = run_report(made, out);
    write_manifest(made, {rep_label, {"report"}, outputs, {}}, false);
    return kExitOk;
  }

  // pipeline
  const auto spec = load_spec(pipe_spec, out);
  const auto dir = make_run_dir(pipe_out, spec.label);
  RunLock lock(dir);
  ManifestUpdate manifest{spec.label, {}, {}, {}};

  const auto structure_path = locate_structure(spec, pipe_spec, pipe_paths.pdb, pipe_fetch);
  if (!pipe_paths.pdb.empty() || structure_path) pipe_paths.pdb = structure_path ? structure_path->string() : pipe_paths.pdb;

  std::vector<std::string> inputs{pipe_spec, pipe_paths.pdb, pipe_paths.psf, pipe_paths.xsc};
  inputs.insert(inputs.end(), pipe_paths.params.begin(), pipe_paths.params.end());
  for (const auto& f : inputs)
    if (!f.empty()) {
      const auto staged = stage_input(dir, f);
      manifest.outputs["input:" + fs::path(f).filename().string()] = "inputs/" + fs::path(f).filename().generic_string();
      (void)staged;
    }
  manifest.input_hashes = hash_inputs(inputs);
  for (const auto& f : {pipe_an.dcd, pipe_an.log})
    if (!f.empty()) manifest.input_hashes[fs::path(f).filename().string()] = report::sha256_file(f);

  const auto validation = validate_with_structure(spec, structure_path, margin);
  print_findings(out, validation);
  const auto vpath = dir.root / "validation.json";
  report::write_text_file(vpath, validation.to_json());
  manifest.commands.push_back("validate");
  manifest.outputs["validation"] = dir.rel(vpath);
  if (!validation.passed()) {
    write_manifest(dir, manifest, true);
    return kExitRejected;
  }

  if (!pipe_paths.psf.empty() && !pipe_paths.params.empty() && !pipe_paths.pdb.empty()) {
    InputPaths paths;
    paths.structure = "../inputs/" + fs::path(pipe_paths.psf).filename().generic_string();
    paths.coordinates = "../inputs/" + fs::path(pipe_paths.pdb).filename().generic_string();
    for (const auto& p : pipe_paths.params) paths.parameter_files.push_back("../inputs/" + fs::path(p).filename().generic_string());
    if (!pipe_paths.xsc.empty()) paths.extended_system = "../inputs/" + fs::path(pipe_paths.xsc).filename().generic_string();
    try {
      const auto configs = write_configs(spec, paths, dir, out);
      manifest.outputs.insert(configs.begin(), configs.end());
      manifest.commands.push_back("gen-namd");
    } catch (const RefusalError& e) {
      err << e.what() << "\n";
      write_manifest(dir, manifest, true);
      return kExitRejected;
    }
  } else {
    out << "gen-namd skipped: needs --psf, --param and a structure\n";
  }

  if (!pipe_an.dcd.empty()) {
    pipe_an.pdb = pipe_paths.pdb;
    pipe_an.psf = pipe_paths.psf;
    if (!pipe_an.metrics.any() && !pipe_an.metrics.all) pipe_an.metrics.all = true;
    auto m = pipe_an.metrics;
    m.expand();
    const auto analysis_outputs = run_analysis(pipe_an, dir, spec.label, out);
    manifest.outputs.insert(analysis_outputs.begin(), analysis_outputs.end());
    manifest.commands.push_back("analyze " + m.names());
    const auto plots = run_report(dir, out);
    manifest.outputs.insert(plots.begin(), plots.end());
    manifest.commands.push_back("report");
  } else {
    out << "analyze skipped: no --dcd\n";
  }
  write_manifest(dir, manifest, true);
  out << "manifest written to " << dir.manifest().string() << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << "\n";
    return kExitRejected;
  } catch (const RefusalError& e) {
    err << "error: " << e.what() << "\n";
    return kExitRejected;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace namdkit::cli
