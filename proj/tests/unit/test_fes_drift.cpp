#include <doctest.h>

#include <cmath>
#include <random>

#include "namdkit/analysis/drift.hpp"
#include "namdkit/analysis/fes.hpp"
#include "namdkit/error.hpp"
#include "oracles.hpp"

using namespace namdkit;
using namespace namdkit::analysis;

namespace {

TimeSeries series(const std::string& name, const std::vector<double>& values, std::int64_t first_index = 0) {
  TimeSeries s{name, "Å", {}};
  for (std::size_t i = 0; i < values.size(); ++i) s.points.push_back({first_index + static_cast<std::int64_t>(i), values[i]});
  return s;
}

std::size_t occupied(const FesGrid& g) {
  std::size_t n = 0;
  for (bool b : g.occupied_mask) n += b ? 1 : 0;
  return n;
}

}  // namespace

TEST_SUITE("fes") {
  TEST_CASE("all points in one cell") {
    const auto rg = series("Rg", {10.1, 10.2, 10.15, 10.12});
    const auto rmsd = series("RMSD", {1.1, 1.2, 1.15, 1.18});
    const auto g = free_energy_surface(rg, rmsd, 4, ValueRange{10.0, 14.0}, ValueRange{1.0, 5.0});
    CHECK(occupied(g) == 1);
    CHECK(g.occupied_mask[g.cell(0, 0)]);
    CHECK(g.free_energy[g.cell(0, 0)] == 0.0);
    CHECK(g.counts[g.cell(0, 0)] == 4);
    for (std::size_t c = 0; c < g.counts.size(); ++c)
      if (!g.occupied_mask[c]) CHECK(std::isnan(g.free_energy[c]));
  }

  TEST_CASE("two cells with counts 3 and 1") {
    const auto rg = series("Rg", {0.0, 0.1, 0.2, 1.0});
    const auto rmsd = series("RMSD", {0.0, 0.0, 0.1, 1.0});
    const auto g = free_energy_surface(rg, rmsd, 2);
    REQUIRE(occupied(g) == 2);
    CHECK(g.counts[g.cell(0, 0)] == 3);
    CHECK(g.counts[g.cell(1, 1)] == 1);
    CHECK(g.free_energy[g.cell(0, 0)] == 0.0);
    CHECK(g.free_energy[g.cell(1, 1)] == doctest::Approx(std::log(3.0)).epsilon(1e-15));
    CHECK(g.free_energy[g.cell(1, 1)] == doctest::Approx(1.0986).epsilon(1e-4));
  }

  TEST_CASE("upper edge is inclusive and counts are conserved") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> a(12.0, 0.5), b(2.0, 0.7);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 10 + rng() % 500;
      std::vector<double> x, y;
      for (std::size_t i = 0; i < n; ++i) {
        x.push_back(a(rng));
        y.push_back(std::abs(b(rng)));
      }
      const int bins = 2 + static_cast<int>(rng() % 40);
      const auto g = free_energy_surface(series("Rg", x), series("RMSD", y), bins);
      std::size_t total = 0;
      for (auto c : g.counts) total += c;
      CHECK(total == n);
      CHECK(g.rg_edges.size() == static_cast<std::size_t>(bins) + 1);
      CHECK(g.rg_edges.back() == *std::max_element(x.begin(), x.end()));
      double min_f = INFINITY;
      for (std::size_t c = 0; c < g.counts.size(); ++c) {
        CHECK(g.occupied_mask[c] == (g.counts[c] > 0));
        if (g.occupied_mask[c]) {
          min_f = std::min(min_f, g.free_energy[c]);
          CHECK(g.free_energy[c] >= 0.0);
        }
      }
      CHECK(min_f == 0.0);
      // the maximum points land in the last bins
      const auto ix = static_cast<std::size_t>(std::max_element(x.begin(), x.end()) - x.begin());
      const double y_at = y[ix];
      std::size_t yb = 0;
      while (yb + 1 < g.n_rmsd() && y_at >= g.rmsd_edges[yb + 1]) ++yb;
      CHECK(g.counts[g.cell(g.n_rg() - 1, yb)] >= 1);
    }
  }

  TEST_CASE("free energy is -ln of relative population") {
    const auto rg = series("Rg", {0, 0, 0, 0, 1, 1, 2, 3});
    const auto rmsd = series("RMSD", {0, 0, 0, 0, 0, 0, 0, 3});
    const auto g = free_energy_surface(rg, rmsd, 3);
    const double fmax = -std::log(4.0 / 8);
    for (std::size_t c = 0; c < g.counts.size(); ++c)
      if (g.counts[c]) CHECK(g.free_energy[c] == doctest::Approx(-std::log(g.counts[c] / 8.0) - fmax).epsilon(1e-14));
  }

  TEST_CASE("errors") {
    const auto rg = series("Rg", {1, 2, 3});
    CHECK_THROWS_AS(free_energy_surface(rg, series("RMSD", {1, 2, 3}, 1), 4), DomainError);
    CHECK_THROWS_AS(free_energy_surface(rg, series("RMSD", {1, 2}), 4), DomainError);
    CHECK_THROWS_AS(free_energy_surface(rg, series("RMSD", {1, 1, 1}), 4), DegenerateInputError);
    CHECK_THROWS_AS(free_energy_surface(rg, series("RMSD", {1, 2, 3}), 1), DomainError);
    CHECK_THROWS_AS(free_energy_surface(rg, series("RMSD", {1, 2, 3}), 4, ValueRange{2.0, 3.0}), DomainError);
  }
}

TEST_SUITE("drift") {
  TEST_CASE("flat series is stable") {
    const auto s = series("RMSD", std::vector<double>(100, 1.5));
    const auto r = drift_check(s, {.window_fraction = 0.5, .slope_tol = 2.0, .level_tol = 3.0});
    CHECK(r.verdict == DriftVerdict::stable);
    CHECK(r.slope == doctest::Approx(0.0));
    CHECK(r.mean_level == doctest::Approx(1.5));
    CHECK(r.window_points == 50);
    CHECK(r.reason.empty());
  }

  TEST_CASE("0 to 12 Å ramp over 1 ns is atypical") {
    std::vector<double> v;
    for (int i = 0; i <= 100; ++i) v.push_back(12.0 * i / 100.0);
    const auto r = drift_check(series("RMSD", v), {.window_fraction = 0.5, .slope_tol = 2.0, .ns_per_frame = 0.01});
    CHECK(r.verdict == DriftVerdict::atypical);
    CHECK(r.slope == doctest::Approx(12.0).epsilon(1e-9));
    CHECK(r.reason.find("slope") != std::string::npos);
    CHECK(std::string(to_string(r.verdict)) == "atypical");
  }

  TEST_CASE("slope matches the normal-equation oracle") {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> noise(0.0, 0.3);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 10 + rng() % 300;
      std::vector<double> v;
      for (std::size_t i = 0; i < n; ++i) v.push_back(1.0 + 0.002 * static_cast<double>(i) + noise(rng));
      DriftOptions o;
      o.window_fraction = 0.3 + 0.1 * (trial % 7);
      o.ns_per_frame = 0.002 * (1 + trial % 5);
      const auto r = drift_check(series("RMSD", v), o);
      const std::size_t w = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(o.window_fraction * n)));
      std::vector<double> t, y;
      for (std::size_t i = n - w; i < n; ++i) {
        t.push_back(static_cast<double>(i) * o.ns_per_frame);
        y.push_back(v[i]);
      }
      CHECK(r.window_points == w);
      CHECK(r.slope == doctest::Approx(oracle::slope(t, y)).epsilon(1e-8));
    }
  }

  TEST_CASE("high plateau is atypical by level") {
    const auto r = drift_check(series("RMSD", std::vector<double>(20, 9.0)));
    CHECK(r.verdict == DriftVerdict::atypical);
    CHECK(r.reason.find("mean") != std::string::npos);
  }

  TEST_CASE("verdict is invariant under an offset within the level headroom") {
    std::vector<double> v(60, 1.0);
    for (double offset : {0.0, 1.0, 3.5, 6.9}) {
      auto shifted = v;
      for (auto& x : shifted) x += offset;
      CHECK(drift_check(series("RMSD", shifted)).verdict == DriftVerdict::stable);
    }
  }

  TEST_CASE("fewer than 10 points") {
    CHECK_THROWS_AS(drift_check(series("RMSD", std::vector<double>(9, 1.0))), InsufficientDataError);
    CHECK_NOTHROW(drift_check(series("RMSD", std::vector<double>(10, 1.0))));
  }
}
