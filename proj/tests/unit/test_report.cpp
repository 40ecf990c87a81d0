#include <doctest.h>

#include <algorithm>
#include <clocale>
#include <cmath>
#include <filesystem>
#include <locale>
#include <random>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "namdkit/analysis/fes.hpp"
#include "namdkit/error.hpp"
#include "namdkit/report.hpp"

using namespace namdkit;
using namespace namdkit::analysis;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("namdkit_report_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct CommaDecimal : std::numpunct<char> {
  char do_decimal_point() const override { return ','; }
  char do_thousands_sep() const override { return '.'; }
  std::string do_grouping() const override { return "\3"; }
};

// Switches the process to comma-decimal formatting for the lifetime of the guard.
struct CommaLocale {
  std::locale saved;
  std::string saved_c;
  CommaLocale() : saved(std::locale()), saved_c(std::setlocale(LC_ALL, nullptr)) {
    for (const char* name : {"de_DE.UTF-8", "de_DE.utf8", "fr_FR.UTF-8", "nl_NL.UTF-8"})
      if (std::setlocale(LC_ALL, name)) break;
    std::locale::global(std::locale(std::locale::classic(), new CommaDecimal));
  }
  ~CommaLocale() {
    std::locale::global(saved);
    std::setlocale(LC_ALL, saved_c.c_str());
  }
};

TimeSeries make_series(const std::vector<double>& v) {
  TimeSeries s{"RMSD", "Å", {}};
  for (std::size_t i = 0; i < v.size(); ++i) s.points.push_back({static_cast<std::int64_t>(i), v[i]});
  return s;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

std::vector<std::string> polyline_pairs(const std::string& svg) {
  const auto start = svg.find("points=\"", svg.find("<polyline"));
  const auto end = svg.find('"', start + 8);
  std::istringstream in(svg.substr(start + 8, end - start - 8));
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("3-point series gives a 4-line CSV") {
    const auto text = report::csv_text(make_series({0.0, 1.25, 3.5}));
    CHECK(text == "index,RMSD (Å)\n0,0\n1,1.25\n2,3.5\n");
    CHECK(text.find('\r') == std::string::npos);
  }

  TEST_CASE("CSV read-back is exact") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    std::vector<double> v;
    for (int i = 0; i < 500; ++i) v.push_back(u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10));
    v.push_back(0.1);
    v.push_back(1.0 / 3.0);
    v.push_back(5e-324);
    v.push_back(1.7976931348623157e308);
    const auto s = make_series(v);
    TempDir dir;
    report::write_csv(s, dir.path / "rmsd.csv");
    const auto back = report::read_series_csv_file(dir.path / "rmsd.csv");
    CHECK(back == s);
  }

  TEST_CASE("CSV output ignores a comma-decimal locale") {
    const auto s = make_series({1234.5, 0.25, -7.125});
    const auto expected = report::csv_text(s);
    std::string under_comma;
    {
      CommaLocale guard;
      std::ostringstream probe;
      probe << 1234.5;
      REQUIRE(probe.str() == "1.234,5");
      under_comma = report::csv_text(s);
      CHECK(report::read_series_csv(under_comma) == s);
      const auto svg = report::render_svg(s);
      CHECK(svg == report::render_svg(s));
    }
    CHECK(under_comma == expected);
    CHECK(under_comma.find("1234.5") != std::string::npos);
  }

  TEST_CASE("per-atom, energy and FES CSVs") {
    PerAtomSeries r;
    r.name = "RMSF";
    r.unit = "Å";
    r.atom_indices = {4, 9};
    r.values = {0.5, 1.5};
    r.residue_slot = {0, 0};
    r.residue_rollup = {{ResidueKey{'A', 12, std::nullopt}, "ALA", 1.0}};
    CHECK(report::csv_text(r) == "atom_index,residue,res_name,RMSF (Å)\n4,A:12,ALA,0.5\n9,A:12,ALA,1.5\n");

    EnergyTable e;
    e.column_names = {"TS", "POTENTIAL"};
    e.rows.push_back({0, {0, -1000.5}});
    e.rows.push_back({100, {100, -1001.25}});
    CHECK(report::csv_text(e) == "TS,POTENTIAL\n0,-1000.5\n100,-1001.25\n");

    TimeSeries rg{"Rg", "Å", {{0, 0.0}, {1, 0.1}, {2, 0.2}, {3, 1.0}}};
    TimeSeries rmsd{"RMSD", "Å", {{0, 0.0}, {1, 0.0}, {2, 0.1}, {3, 1.0}}};
    const auto g = free_energy_surface(rg, rmsd, 2);
    const auto text = report::csv_text(g);
    CHECK(count_of(text, "\n") == 5);
    CHECK(count_of(text, ",nan\n") == 2);
    const auto back = report::read_fes_csv(text);
    CHECK(back.counts == g.counts);
    CHECK(back.rg_edges == g.rg_edges);
    CHECK(back.rmsd_edges == g.rmsd_edges);
    CHECK(back.occupied_mask == g.occupied_mask);
  }

  TEST_CASE("unwritable path is an I/O error") {
    CHECK_THROWS_AS(report::write_csv(make_series({1.0}), "/nonexistent_dir/for/sure/x.csv"), IoError);
  }

  TEST_CASE("2-point series plots one polyline with 2 pairs") {
    const auto svg = report::render_svg(make_series({1.0, 2.0}));
    CHECK(count_of(svg, "<polyline") == 1);
    const auto pairs = polyline_pairs(svg);
    REQUIRE(pairs.size() == 2);
    const std::regex pair_re(R"(-?\d+\.\d{2},-?\d+\.\d{2})");
    for (const auto& p : pairs) CHECK(std::regex_match(p, pair_re));
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("RMSD (Å)") != std::string::npos);
    CHECK(svg.find("href") == std::string::npos);
    CHECK(svg == report::render_svg(make_series({1.0, 2.0})));
  }

  TEST_CASE("x axis scale and labels") {
    report::PlotStyle style;
    style.x_label = "time";
    style.x_unit = "ns";
    style.x_scale = 0.01;
    style.title = "RMSD <check> & more";
    const auto svg = report::render_svg(make_series({1.0, 2.0, 1.5}), style);
    CHECK(svg.find("time (ns)") != std::string::npos);
    CHECK(svg.find("&lt;check&gt; &amp; more") != std::string::npos);
    CHECK(polyline_pairs(svg).size() == 3);
  }

  TEST_CASE("empty or non-finite series cannot be plotted") {
    CHECK_THROWS_AS(report::render_svg(TimeSeries{"x", "y", {}}), DomainError);
    CHECK_THROWS_AS(report::render_svg(make_series({1.0, std::nan("")})), DomainError);
  }

  TEST_CASE("2x2 FES with one masked cell has three coloured cells") {
    TimeSeries rg{"Rg", "Å", {{0, 0.0}, {1, 0.0}, {2, 1.0}, {3, 1.0}}};
    TimeSeries rmsd{"RMSD", "Å", {{0, 0.0}, {1, 1.0}, {2, 0.0}, {3, 0.0}}};
    const auto g = free_energy_surface(rg, rmsd, 2);
    REQUIRE(std::count(g.occupied_mask.begin(), g.occupied_mask.end(), true) == 3);
    const auto svg = report::render_svg(g);
    CHECK(count_of(svg, "class=\"cell\"") == 3);
    CHECK(svg == report::render_svg(g));
  }

  TEST_CASE("sha256") {
    CHECK(report::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(report::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }

  TEST_CASE("manifest has stable keys and checks outputs") {
    TempDir dir;
    fs::create_directories(dir.path / "analysis");
    report::write_text_file(dir.path / "analysis" / "rmsd.csv", "index,RMSD (Å)\n");
    report::RunManifest m;
    m.spec_label = "demo";
    m.input_hashes = {{"b.pdb", "22"}, {"a.psf", "11"}};
    m.commands_run = {"validate", "analyze"};
    m.outputs = {{"rmsd", "analysis/rmsd.csv"}};
    m.tool_version = "0.1.0";
    m.generated_at = "2026-01-01T00:00:00Z";
    const auto text = report::manifest_json(m, dir.path);
    CHECK(text == report::manifest_json(m, dir.path));
    const auto j = nlohmann::json::parse(text);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"commands_run", "generated_at", "input_hashes", "outputs", "spec_label",
                                           "tool_version"});
    CHECK(text.find("\"a.psf\"") < text.find("\"b.pdb\""));
    CHECK(j["commands_run"][0] == "validate");
    m.outputs["missing"] = "plots/none.svg";
    CHECK_THROWS_AS(report::manifest_json(m, dir.path), IoError);
  }
}
