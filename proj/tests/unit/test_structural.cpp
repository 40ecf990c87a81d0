#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "namdkit/analysis/structural.hpp"
#include "namdkit/error.hpp"
#include "namdkit/geometry.hpp"
#include "oracles.hpp"

using namespace namdkit;
using namespace namdkit::analysis;

namespace {

// n atoms named CA, `per_residue` atoms per ALA residue.
Structure ca_structure(std::size_t n, std::size_t per_residue = 1) {
  std::string text;
  for (std::size_t i = 0; i < n; ++i)
    text += fixtures::pdb_atom(static_cast<int>(i + 1), "CA", "ALA", 'A', static_cast<int>(i / per_residue + 1),
                               static_cast<double>(i), 0, 0, "C") +
            "\n";
  return parse_pdb(text);
}

Selection all_of(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return make_selection(idx, "all");
}

Coords rigid(const Coords& xs, const Mat3& r, const Vec3& t) {
  Coords out;
  for (const auto& x : xs) out.push_back(r * x + t);
  return out;
}

std::vector<Frame> jittered(std::mt19937_64& rng, const Coords& base, std::size_t n_frames, double sigma,
                            bool move_rigidly) {
  std::normal_distribution<double> g(0.0, sigma);
  std::uniform_real_distribution<double> u(-20, 20);
  std::vector<Coords> coords;
  for (std::size_t f = 0; f < n_frames; ++f) {
    Coords c = base;
    for (auto& x : c) x += Vec3(g(rng), g(rng), g(rng));
    if (move_rigidly) c = rigid(c, fixtures::random_rotation(rng), Vec3(u(rng), u(rng), u(rng)));
    coords.push_back(std::move(c));
  }
  return fixtures::frames_of(coords);
}

double max_abs_diff(const Coords& a, const Coords& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, (a[i] - b[i]).cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

TEST_SUITE("structural") {
  TEST_CASE("rmsd of copies of the reference is zero") {
    std::mt19937_64 rng(1);
    const auto ref = fixtures::random_cloud(rng, 20);
    const auto frames = fixtures::frames_of({ref, ref, ref});
    for (bool superpose : {true, false}) {
      const auto s = rmsd_series(frames, ref, all_of(20), superpose);
      CHECK(s.unit == "Å");
      REQUIRE(s.size() == 3);
      for (const auto& p : s.points) CHECK(p.value < 1e-12);
    }
  }

  TEST_CASE("superposition removes rigid motion") {
    std::mt19937_64 rng(2);
    const auto ref = fixtures::random_cloud(rng, 30);
    std::vector<Coords> moved;
    for (int f = 0; f < 10; ++f) moved.push_back(rigid(ref, fixtures::random_rotation(rng), Vec3(f, -f, 2 * f)));
    const auto s = rmsd_series(fixtures::frames_of(moved), ref, all_of(30));
    for (const auto& p : s.points) CHECK(p.value < 1e-6);
    for (std::size_t f = 0; f < s.size(); ++f) CHECK(s.points[f].frame_index == static_cast<std::int64_t>(f));
  }

  TEST_CASE("5-frame, 6-atom trajectory matches the direct formula") {
    std::mt19937_64 rng(3);
    const auto ref = fixtures::random_cloud(rng, 6);
    const auto frames = jittered(rng, ref, 5, 0.8, true);
    const auto raw = rmsd_series(frames, ref, all_of(6), false);
    const auto fit = rmsd_series(frames, ref, all_of(6), true);
    for (std::size_t f = 0; f < 5; ++f) {
      const auto x = fixtures::plain(frames[f].coords);
      CHECK(std::abs(raw.points[f].value - oracle::rmsd(x, fixtures::plain(ref))) < 1e-9);
      CHECK(std::abs(fit.points[f].value - oracle::superposed_rmsd(x, fixtures::plain(ref))) < 1e-9);
    }
  }

  TEST_CASE("selection restricts the atoms compared") {
    std::mt19937_64 rng(4);
    const auto ref = fixtures::random_cloud(rng, 10);
    auto moved = ref;
    moved[9] += Vec3(30, 0, 0);  // outside the selection
    moved[2] += Vec3(0, 3, 4);
    const auto sel = make_selection({0, 1, 2, 3}, "first four");
    const auto s = rmsd_series(fixtures::frames_of({moved}), ref, sel, false);
    CHECK(s.points[0].value == doctest::Approx(std::sqrt(25.0 / 4)).epsilon(1e-12));
    CHECK_THROWS_AS(rmsd_series(fixtures::frames_of({moved}), ref, make_selection({3, 12}, "bad")), DomainError);
  }

  TEST_CASE("fitted rmsd is invariant under a fixed rigid transform of all frames") {
    std::mt19937_64 rng(5);
    const auto ref = fixtures::random_cloud(rng, 25);
    const auto frames = jittered(rng, ref, 12, 1.0, false);
    const auto base = rmsd_series(frames, ref, all_of(25));
    for (int trial = 0; trial < 5; ++trial) {
      const Mat3 r = fixtures::random_rotation(rng);
      const Vec3 t(7, -3, 11);
      auto moved = frames;
      for (auto& f : moved) f.coords = rigid(f.coords, r, t);
      const auto s = rmsd_series(moved, ref, all_of(25));
      for (std::size_t f = 0; f < s.size(); ++f) CHECK(std::abs(s.points[f].value - base.points[f].value) < 1e-9);
    }
  }

  TEST_CASE("average of identical frames is that frame after one pass") {
    std::mt19937_64 rng(6);
    const auto x = fixtures::random_cloud(rng, 9);
    const auto avg = average_structure(fixtures::frames_of({x, x, x, x}), all_of(9));
    CHECK(avg.iterations == 1);
    CHECK(avg.converged);
    CHECK(max_abs_diff(avg.coords, x) < 1e-12);
    CHECK_THROWS_AS(average_structure(std::vector<Frame>{}, all_of(9)), DomainError);
  }

  TEST_CASE("average of a symmetric pair is the base") {
    // principal axes along x, y, z so a diagonal strain keeps the optimal rotation at identity
    const Coords base{Vec3(3, 0, 0),  Vec3(-3, 0, 0), Vec3(0, 2, 0),
                      Vec3(0, -2, 0), Vec3(0, 0, 1),  Vec3(0, 0, -1)};
    const Vec3 strain(0.02, -0.03, 0.05);
    Coords plus, minus;
    for (const auto& b : base) {
      plus.push_back(b + strain.cwiseProduct(b));
      minus.push_back(b - strain.cwiseProduct(b));
    }
    const auto avg = average_structure(fixtures::frames_of({plus, minus}), all_of(6));
    CHECK(max_abs_diff(avg.coords, base) < 1e-9);
  }

  TEST_CASE("average structure is converged: one more pass moves it less than tol") {
    std::mt19937_64 rng(7);
    const auto base = fixtures::random_cloud(rng, 15);
    const auto frames = jittered(rng, base, 10, 0.5, true);
    const double tol = 1e-6;
    const auto a50 = average_structure(frames, all_of(15), 50, tol);
    const auto a51 = average_structure(frames, all_of(15), 51, tol);
    CHECK(a50.converged);
    const auto fit = geometry::kabsch(a51.coords, a50.coords);
    CHECK(geometry::rmsd_raw(fit.apply(a51.coords), a50.coords) < tol);
  }

  TEST_CASE("rmsf of a static trajectory is zero") {
    std::mt19937_64 rng(8);
    const auto x = fixtures::random_cloud(rng, 5);
    const auto s = ca_structure(5);
    const auto r = rmsf(fixtures::frames_of({x, x, x}), s, all_of(5));
    CHECK(r.unit == "Å");
    for (double v : r.values) CHECK(v < 1e-9);
  }

  TEST_CASE("one atom oscillating by plus/minus d") {
    const double d = 0.75;
    Coords a{Vec3(0, 0, 0), Vec3(5, 0, 0), Vec3(0, 5, 0), Vec3(0, 0, 5)};
    Coords b = a;
    a[1].x() += d;
    b[1].x() -= d;
    const auto r = rmsf(fixtures::frames_of({a, b}), ca_structure(4), all_of(4), RmsfOptions{.superpose = false});
    CHECK(r.values[1] == doctest::Approx(d).epsilon(1e-12));
    CHECK(r.values[0] == 0.0);
    CHECK(r.values[2] == 0.0);
    CHECK(r.values[3] == 0.0);
  }

  TEST_CASE("random 20-frame rmsf matches the two-pass variance") {
    std::mt19937_64 rng(9);
    const auto base = fixtures::random_cloud(rng, 12);
    const auto frames = jittered(rng, base, 20, 0.7, false);
    const auto r = rmsf(frames, ca_structure(12), all_of(12), RmsfOptions{.superpose = false});
    std::vector<std::vector<oracle::P>> plain;
    for (const auto& f : frames) plain.push_back(fixtures::plain(f.coords));
    const auto expected = oracle::rmsf(plain);
    for (std::size_t i = 0; i < 12; ++i) CHECK(std::abs(r.values[i] - expected[i]) < 1e-9);
  }

  TEST_CASE("fitted rmsf ignores rigid motion") {
    std::mt19937_64 rng(10);
    const auto base = fixtures::random_cloud(rng, 12);
    const auto noisy = jittered(rng, base, 20, 0.5, false);
    auto moved = noisy;
    for (auto& f : moved) f.coords = rigid(f.coords, fixtures::random_rotation(rng), Vec3(4, 5, 6));
    const auto s = ca_structure(12);
    const auto a = rmsf(noisy, s, all_of(12));
    const auto b = rmsf(moved, s, all_of(12));
    for (std::size_t i = 0; i < 12; ++i) CHECK(std::abs(a.values[i] - b.values[i]) < 1e-5);
    const auto rigid_only = jittered(rng, base, 8, 0.0, true);
    for (double v : rmsf(rigid_only, s, all_of(12)).values) CHECK(v < 1e-6);
  }

  TEST_CASE("rmsf residue rollup is the per-residue mean") {
    std::mt19937_64 rng(11);
    const auto base = fixtures::random_cloud(rng, 9);
    const auto frames = jittered(rng, base, 6, 0.4, false);
    const auto s = ca_structure(9, 3);
    const auto r = rmsf(frames, s, make_selection({0, 1, 2, 4, 5, 8}, "subset"), RmsfOptions{.superpose = false});
    REQUIRE(r.residue_rollup.size() == 3);
    CHECK(r.residue_rollup[0].residue.res_seq == 1);
    CHECK(r.residue_rollup[0].value == doctest::Approx((r.values[0] + r.values[1] + r.values[2]) / 3));
    CHECK(r.residue_rollup[1].value == doctest::Approx((r.values[3] + r.values[4]) / 2));
    CHECK(r.residue_rollup[2].value == doctest::Approx(r.values[5]));
    CHECK(r.residue_rollup[2].res_name == "ALA");
  }

  TEST_CASE("rmsf needs two frames") {
    const Coords x{Vec3(0, 0, 0)};
    CHECK_THROWS_AS(rmsf(fixtures::frames_of({x}), ca_structure(1), all_of(1)), DegenerateInputError);
  }

  TEST_CASE("B-factor conversion") {
    PerAtomSeries r;
    r.name = "RMSF";
    r.unit = "Å";
    r.atom_indices = {0, 1, 2};
    r.values = {0.0, 1.0, 2.0};
    const auto b = rmsf_to_bfactor(r);
    CHECK(b.unit == "Å²");
    CHECK(b.values[0] == 0.0);
    CHECK(b.values[1] == doctest::Approx(26.3189).epsilon(1e-5));
    CHECK(b.values[1] == doctest::Approx(8 * std::numbers::pi * std::numbers::pi / 3).epsilon(1e-15));
    CHECK(b.values[2] == doctest::Approx(4 * b.values[1]).epsilon(1e-15));
    r.values[0] = -0.1;
    CHECK_THROWS_AS(rmsf_to_bfactor(r), DomainError);
  }

  TEST_CASE("radius of gyration examples") {
    const std::vector<double> unit{1.0, 1.0};
    const double d = 2.5;
    const auto single = radius_of_gyration_series(fixtures::frames_of({{Vec3(4, 4, 4)}}), all_of(1),
                                                  std::vector<double>{12.0});
    CHECK(single.points[0].value == 0.0);
    const auto dumbbell =
        radius_of_gyration_series(fixtures::frames_of({{Vec3(-d, 0, 0), Vec3(d, 0, 0)}}), all_of(2), unit);
    CHECK(dumbbell.points[0].value == doctest::Approx(d).epsilon(1e-15));
    const auto skewed = radius_of_gyration_series(fixtures::frames_of({{Vec3(0, 0, 0), Vec3(4, 0, 0)}}), all_of(2),
                                                  std::vector<double>{1.0, 3.0});
    CHECK(skewed.points[0].value == doctest::Approx(1.7320508).epsilon(1e-8));
    CHECK(skewed.unit == "Å");
    CHECK_THROWS_AS(radius_of_gyration_series(fixtures::frames_of({{Vec3(0, 0, 0), Vec3(4, 0, 0)}}), all_of(2),
                                              std::vector<double>{1.0, 0.0}),
                    DomainError);
  }

  TEST_CASE("radius of gyration matches the formula and is rigid-invariant") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> mass(1.0, 32.0);
    const auto base = fixtures::random_cloud(rng, 40);
    std::vector<double> m;
    for (int i = 0; i < 40; ++i) m.push_back(mass(rng));
    const auto frames = jittered(rng, base, 6, 1.0, false);
    const auto sel = make_selection({1, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}, "odd");
    const auto rg = radius_of_gyration_series(frames, sel, m);
    auto moved = frames;
    for (auto& f : moved) f.coords = rigid(f.coords, fixtures::random_rotation(rng), Vec3(-8, 9, 100));
    const auto rg_moved = radius_of_gyration_series(moved, sel, m);
    for (std::size_t f = 0; f < frames.size(); ++f) {
      std::vector<oracle::P> x;
      std::vector<double> w;
      for (std::size_t i : sel.atom_indices) {
        x.push_back({frames[f].coords[i].x(), frames[f].coords[i].y(), frames[f].coords[i].z()});
        w.push_back(m[i]);
      }
      CHECK(std::abs(rg.points[f].value - oracle::radius_of_gyration(x, w)) < 1e-9);
      CHECK(std::abs(rg_moved.points[f].value - rg.points[f].value) < 1e-9);
    }
  }

  TEST_CASE("parallel evaluation equals sequential") {
    std::mt19937_64 rng(13);
    const auto base = fixtures::random_cloud(rng, 30);
    const auto frames = jittered(rng, base, 37, 0.6, true);
    const auto s = ca_structure(30);
    const auto m = std::vector<double>(30, 12.011);
    const Parallelism one{1}, many{4};
    CHECK(rmsd_series(frames, base, all_of(30), true, one) == rmsd_series(frames, base, all_of(30), true, many));
    CHECK(radius_of_gyration_series(frames, all_of(30), m, one) ==
          radius_of_gyration_series(frames, all_of(30), m, many));
    CHECK(rmsf(frames, s, all_of(30), {}, one) == rmsf(frames, s, all_of(30), {}, many));
    const auto a1 = average_structure(frames, all_of(30), 50, 1e-6, one);
    const auto a4 = average_structure(frames, all_of(30), 50, 1e-6, many);
    CHECK(a1.iterations == a4.iterations);
    CHECK(max_abs_diff(a1.coords, a4.coords) == 0.0);
  }
}
