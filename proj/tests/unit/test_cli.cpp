#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "fixtures.hpp"
#include "namdkit/cli.hpp"
#include "namdkit/io/dcd.hpp"
#include "namdkit/report.hpp"

namespace fs = std::filesystem;
using namdkit::Coords;
using namdkit::Vec3;

namespace {

struct Workspace {
  fs::path root;
  Workspace() {
    root = fs::temp_directory_path() / ("namdkit_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(root / "cache");
    ::setenv(namdkit::cli::kCacheEnv, (root / "cache").c_str(), 1);
  }
  ~Workspace() { fs::remove_all(root); }

  fs::path write(const std::string& name, const std::string& text) const {
    const auto p = root / name;
    namdkit::report::write_text_file(p, text);
    return p;
  }
};

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "namdkit");
  std::ostringstream out, err;
  const int code = namdkit::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string solution_spec(const std::string& pdb_file) {
  return "label: Test peptide\npdb_file: " + pdb_file +
         "\ncase_type: solution\ntemperature: 300 K\nhmr: true\nperiodic: true\nforce_field: CHARMM36m\n"
         "ion_type: KCl\nion_concentration: 0.15 M\n";
}

std::string bilayer_spec(const std::string& pdb_file, double xy) {
  return "label: Test membrane\npdb_file: " + pdb_file +
         "\ncase_type: bilayer\ntemperature: 310 K\nhmr: true\nperiodic: true\nforce_field: CHARMM36m\n"
         "ion_type: KCl\nion_concentration: 0.15 M\norientation_source: OPM\n"
         "membrane:\n  upper_lipids: {POPC: 1}\n  lower_lipids: {POPC: 1}\n  xy_dim: " +
         std::to_string(xy) + "\n";
}

// Writes a trajectory of `n_frames` copies of the peptide with small random jitter.
fs::path write_trajectory(const Workspace& ws, const std::string& name, const Coords& base, int n_frames, double sigma,
                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<namdkit::Frame> frames;
  for (int f = 0; f < n_frames; ++f) {
    Coords c = base;
    for (auto& v : c) v += Vec3(g(rng), g(rng), g(rng));
    for (auto& v : c) v = v.cast<float>().cast<double>();
    frames.push_back({f, c, std::nullopt});
  }
  namdkit::DcdHeader h;
  h.n_frames = n_frames;
  h.first_step = 5000;
  h.step_interval = 5000;
  h.timestep = 2.0 / namdkit::kAkmaFemtoseconds;
  h.n_atoms = static_cast<std::int32_t>(base.size());
  const auto p = ws.root / name;
  namdkit::write_dcd_file(p.string(), h, frames);
  return p;
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    auto text = ss.str();
    if (e.path().filename() == "manifest.json") {
      auto j = nlohmann::json::parse(text);
      j.erase("generated_at");
      text = j.dump();
    }
    out[e.path().lexically_relative(root).generic_string()] = text;
  }
  return out;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("validate rejects a bilayer narrower than the protein") {
    Workspace ws;
    ws.write("wide.pdb", fixtures::peptide_pdb(12));
    const auto spec = ws.write("spec.yml", bilayer_spec("wide.pdb", 35));
    const auto r = run({"validate", spec.string()});
    CHECK(r.code == namdkit::cli::kExitRejected);
    CHECK(r.out.find("validation failed") != std::string::npos);
    CHECK(r.out.find("35") != std::string::npos);

    const auto ok = ws.write("ok.yml", bilayer_spec("wide.pdb", 80));
    CHECK(run({"validate", ok.string()}).code == namdkit::cli::kExitOk);
  }

  TEST_CASE("validate writes a report and manifest when asked") {
    Workspace ws;
    ws.write("p.pdb", fixtures::peptide_pdb(3));
    const auto spec = ws.write("spec.yml", solution_spec("p.pdb"));
    const auto r = run({"validate", spec.string(), "--out", (ws.root / "runs").string()});
    REQUIRE(r.code == 0);
    const auto run_dir = ws.root / "runs" / "Test_peptide";
    CHECK(fs::exists(run_dir / "validation.json"));
    std::ifstream in(run_dir / "manifest.json");
    const auto m = nlohmann::json::parse(in);
    CHECK(m["commands_run"] == nlohmann::json::array({"validate"}));
    CHECK(m["input_hashes"].contains("spec.yml"));
  }

  TEST_CASE("analyze --rmsd on a static trajectory gives zeros") {
    Workspace ws;
    const auto pdb = ws.write("p.pdb", fixtures::peptide_pdb(4));
    const auto structure = namdkit::read_pdb_file(pdb.string());
    const auto dcd = write_trajectory(ws, "static.dcd", structure.coordinates(), 5, 0.0, 1);
    const auto r = run({"analyze", "--pdb", pdb.string(), "--dcd", dcd.string(), "--rmsd", "--out",
                        (ws.root / "runs").string(), "--label", "static"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto series = namdkit::report::read_series_csv_file(ws.root / "runs" / "static" / "analysis" / "rmsd.csv");
    REQUIRE(series.points.size() == 5);
    for (const auto& p : series.points) CHECK(std::abs(p.value) < 1e-6);
    CHECK(series.points[1].frame_index == 1);
  }

  TEST_CASE("pipeline is deterministic apart from the timestamp") {
    Workspace ws;
    const auto pdb = ws.write("p.pdb", fixtures::peptide_pdb(4));
    const auto structure = namdkit::read_pdb_file(pdb.string());
    const auto dcd = write_trajectory(ws, "traj.dcd", structure.coordinates(), 12, 0.3, 7);
    const auto spec = ws.write("spec.yml", solution_spec("p.pdb"));
    std::map<std::string, std::string> first;
    for (int pass = 0; pass < 2; ++pass) {
      const auto out = ws.root / ("runs" + std::to_string(pass));
      const auto r = run({"pipeline", spec.string(), "--dcd", dcd.string(), "--out", out.string(), "--sphere-points",
                          "100", "--threads", pass == 0 ? "1" : "3"});
      REQUIRE_MESSAGE(r.code == 0, r.err);
      const auto contents = tree_contents(out);
      CHECK(contents.count("Test_peptide/analysis/rmsd.csv") == 1);
      CHECK(contents.count("Test_peptide/plots/rmsd.svg") == 1);
      CHECK(contents.count("Test_peptide/analysis/sasa.csv") == 1);
      if (pass == 0)
        first = contents;
      else
        CHECK(contents == first);
    }
  }

  TEST_CASE("exit codes") {
    Workspace ws;
    CHECK(run({"validate", (ws.root / "missing.yml").string()}).code == namdkit::cli::kExitFailure);
    CHECK(run({"no-such-command"}).code == namdkit::cli::kExitFailure);
    CHECK(run({}).code == namdkit::cli::kExitFailure);
    CHECK(run({"--version"}).code == namdkit::cli::kExitOk);

    const auto malformed = ws.write("bad.yml", "label: [unclosed\n");
    const auto r = run({"validate", malformed.string()});
    CHECK(r.code == namdkit::cli::kExitFailure);
    CHECK(r.err.find("line") != std::string::npos);

    const auto incomplete = ws.write("incomplete.yml", "label: x\n");
    CHECK(run({"validate", incomplete.string()}).code == namdkit::cli::kExitRejected);

    const auto pdb = ws.write("p.pdb", fixtures::peptide_pdb(2));
    CHECK(run({"analyze", "--pdb", pdb.string(), "--out", (ws.root / "runs").string()}).code ==
          namdkit::cli::kExitFailure);
    CHECK(run({"fetch", "not-an-id"}).code == namdkit::cli::kExitFailure);
  }

  TEST_CASE("preflight reports findings without network access") {
    Workspace ws;
    const auto pdb = ws.write("p.pdb", fixtures::peptide_pdb(3));
    const auto r = run({"preflight", pdb.string(), "--json", (ws.root / "pre.json").string()});
    CHECK(r.code == 0);
    CHECK(fs::exists(ws.root / "pre.json"));
  }
}
