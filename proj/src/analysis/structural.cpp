#include "namdkit/analysis/structural.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "namdkit/error.hpp"
#include "namdkit/geometry.hpp"
#include "parallel.hpp"

namespace namdkit::analysis {

std::vector<double> TimeSeries::values() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.value);
  return out;
}

void PerAtomSeries::recompute_rollup() {
  std::vector<double> sum(residue_rollup.size(), 0.0);
  std::vector<std::size_t> count(residue_rollup.size(), 0);
  for (std::size_t k = 0; k < values.size() && k < residue_slot.size(); ++k) {
    sum[residue_slot[k]] += values[k];
    ++count[residue_slot[k]];
  }
  for (std::size_t r = 0; r < residue_rollup.size(); ++r)
    residue_rollup[r].value = count[r] ? sum[r] / static_cast<double>(count[r]) : 0.0;
}

namespace {

void check_frames(FramesView frames, const Selection& sel) {
  for (const auto& f : frames) sel.check(f.coords.size());
}

std::vector<geometry::Superposition> fit_all(FramesView frames, const Selection& sel, CoordsView target,
                                             Parallelism par) {
  std::vector<geometry::Superposition> fits(frames.size());
  detail::parallel_for(frames.size(), par, [&](std::size_t f) {
    const Coords mobile = sel.gather(frames[f].coords);
    fits[f] = geometry::kabsch(mobile, target);
  });
  return fits;
}

// Mean of the selected coordinates, each frame mapped through its fit (if any).
Coords mean_positions(FramesView frames, const Selection& sel, const std::vector<geometry::Superposition>* fits) {
  Coords mean(sel.size(), Vec3::Zero());
  for (std::size_t f = 0; f < frames.size(); ++f)
    for (std::size_t k = 0; k < sel.size(); ++k) {
      const Vec3& x = frames[f].coords[sel.atom_indices[k]];
      mean[k] += fits ? (*fits)[f].apply(x) : x;
    }
  for (auto& m : mean) m /= static_cast<double>(frames.size());
  return mean;
}

}  // namespace

TimeSeries rmsd_series(FramesView frames, CoordsView reference, const Selection& sel, bool superpose,
                       Parallelism par) {
  sel.check(reference.size());
  check_frames(frames, sel);
  if (sel.empty()) throw DomainError("rmsd_series: empty selection");
  const Coords ref = sel.gather(reference);

  TimeSeries out{"RMSD", "Å", std::vector<SeriesPoint>(frames.size())};
  detail::parallel_for(frames.size(), par, [&](std::size_t f) {
    const Coords mobile = sel.gather(frames[f].coords);
    const double value = superpose ? geometry::kabsch(mobile, ref).rmsd_after : geometry::rmsd_raw(mobile, ref);
    out.points[f] = {frames[f].index, value};
  });
  return out;
}

AverageStructure average_structure(FramesView frames, const Selection& sel, int max_iter, double tol,
                                   Parallelism par) {
  if (frames.empty()) throw DomainError("average_structure: empty trajectory");
  if (sel.empty()) throw DomainError("average_structure: empty selection");
  check_frames(frames, sel);

  AverageStructure result;
  result.coords = mean_positions(frames, sel, nullptr);
  for (int it = 0; it < max_iter; ++it) {
    const auto fits = fit_all(frames, sel, result.coords, par);
    Coords next = mean_positions(frames, sel, &fits);
    const double shift = geometry::rmsd_raw(next, result.coords);
    result.coords = std::move(next);
    result.iterations = it + 1;
    if (shift < tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

PerAtomSeries rmsf(FramesView frames, const Structure& structure, const Selection& sel, RmsfOptions options,
                   Parallelism par) {
  if (frames.size() < 2)
    throw DegenerateInputError("rmsf needs at least two frames, got " + std::to_string(frames.size()));
  if (sel.empty()) throw DomainError("rmsf: empty selection");
  sel.check(structure.size());
  check_frames(frames, sel);

  std::vector<geometry::Superposition> fits;
  if (options.superpose) {
    const auto avg = average_structure(frames, sel, options.max_iter, options.tol, par);
    fits = fit_all(frames, sel, avg.coords, par);
  }
  const auto* fit_ptr = options.superpose ? &fits : nullptr;
  const Coords mean = mean_positions(frames, sel, fit_ptr);

  std::vector<double> sum_sq(sel.size(), 0.0);
  for (std::size_t f = 0; f < frames.size(); ++f)
    for (std::size_t k = 0; k < sel.size(); ++k) {
      const Vec3& x = frames[f].coords[sel.atom_indices[k]];
      const Vec3 r = fit_ptr ? fits[f].apply(x) : x;
      sum_sq[k] += (r - mean[k]).squaredNorm();
    }

  PerAtomSeries out{"RMSF", "Å", sel.atom_indices, {}, {}, {}};
  out.values.reserve(sel.size());
  for (double s : sum_sq) out.values.push_back(std::sqrt(s / static_cast<double>(frames.size())));

  // residues appear in atom order, so a running group is enough
  const Residue* current = nullptr;
  for (std::size_t k = 0; k < sel.size(); ++k) {
    const Residue& res = structure.residue_of(sel.atom_indices[k]);
    if (&res != current) {
      current = &res;
      out.residue_rollup.push_back({res.key, res.name, 0.0});
    }
    out.residue_slot.push_back(out.residue_rollup.size() - 1);
  }
  out.recompute_rollup();
  return out;
}

PerAtomSeries rmsf_to_bfactor(const PerAtomSeries& rmsf) {
  constexpr double factor = 8.0 * std::numbers::pi * std::numbers::pi / 3.0;
  PerAtomSeries out = rmsf;
  out.name = "B-factor";
  out.unit = "Å²";
  for (auto& v : out.values) {
    if (v < 0) throw DomainError("rmsf_to_bfactor: negative RMSF");
    v = factor * v * v;
  }
  out.recompute_rollup();
  return out;
}

TimeSeries radius_of_gyration_series(FramesView frames, const Selection& sel, std::span<const double> masses,
                                     Parallelism par) {
  sel.check(masses.size());
  check_frames(frames, sel);
  if (sel.empty()) throw DomainError("radius of gyration: empty selection");
  const auto m = sel.gather(masses);
  for (double v : m)
    if (!(v > 0)) throw DomainError("radius of gyration: selected atoms need positive masses");
  double total = 0;
  for (double v : m) total += v;

  TimeSeries out{"Rg", "Å", std::vector<SeriesPoint>(frames.size())};
  detail::parallel_for(frames.size(), par, [&](std::size_t f) {
    const Coords r = sel.gather(frames[f].coords);
    const Vec3 com = geometry::center_of_mass(r, m);
    double sum = 0;
    for (std::size_t k = 0; k < r.size(); ++k) sum += m[k] * (r[k] - com).squaredNorm();
    out.points[f] = {frames[f].index, std::sqrt(sum / total)};
  });
  return out;
}

}  // namespace namdkit::analysis
