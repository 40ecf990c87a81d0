#include "namdkit/analysis/fes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "namdkit/error.hpp"

namespace namdkit::analysis {
namespace {

std::vector<double> edges_for(const TimeSeries& s, int n_bins, const std::optional<ValueRange>& range) {
  double lo, hi;
  if (range) {
    std::tie(lo, hi) = *range;
  } else {
    const auto v = s.values();
    lo = *std::min_element(v.begin(), v.end());
    hi = *std::max_element(v.begin(), v.end());
  }
  if (!(hi > lo)) throw DegenerateInputError("series '" + s.name + "' has zero range; cannot bin");
  std::vector<double> edges(static_cast<std::size_t>(n_bins) + 1);
  const double width = (hi - lo) / n_bins;
  for (int k = 0; k <= n_bins; ++k) edges[static_cast<std::size_t>(k)] = lo + width * k;
  edges.back() = hi;
  return edges;
}

std::size_t bin_of(double v, const std::vector<double>& edges, const std::string& name) {
  const double lo = edges.front(), hi = edges.back();
  if (v < lo || v > hi) throw DomainError(name + " value " + std::to_string(v) + " lies outside the histogram range");
  const std::size_t n = edges.size() - 1;
  auto b = static_cast<std::size_t>(std::floor((v - lo) / (hi - lo) * static_cast<double>(n)));
  return std::min(b, n - 1);
}

}  // namespace

FesGrid free_energy_surface(const TimeSeries& rg, const TimeSeries& rmsd, int n_bins, std::optional<ValueRange> rg_range,
                            std::optional<ValueRange> rmsd_range) {
  if (n_bins < 2) throw DomainError("free energy surface needs at least 2 bins per axis");
  if (rg.size() != rmsd.size()) throw DomainError("Rg and RMSD series have different lengths");
  for (std::size_t i = 0; i < rg.size(); ++i)
    if (rg.points[i].frame_index != rmsd.points[i].frame_index)
      throw DomainError("Rg and RMSD series disagree on frame index at position " + std::to_string(i));
  if (rg.points.empty()) throw DomainError("free energy surface of empty series");

  FesGrid grid;
  grid.rg_edges = edges_for(rg, n_bins, rg_range);
  grid.rmsd_edges = edges_for(rmsd, n_bins, rmsd_range);
  const std::size_t n_cells = grid.n_rg() * grid.n_rmsd();
  grid.counts.assign(n_cells, 0);
  for (std::size_t i = 0; i < rg.size(); ++i) {
    const auto a = bin_of(rg.points[i].value, grid.rg_edges, rg.name);
    const auto b = bin_of(rmsd.points[i].value, grid.rmsd_edges, rmsd.name);
    ++grid.counts[grid.cell(a, b)];
  }

  const double total = static_cast<double>(rg.size());
  grid.free_energy.assign(n_cells, std::numeric_limits<double>::quiet_NaN());
  grid.occupied_mask.assign(n_cells, false);
  double min_f = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < n_cells; ++c) {
    if (grid.counts[c] == 0) continue;
    grid.occupied_mask[c] = true;
    grid.free_energy[c] = -std::log(static_cast<double>(grid.counts[c]) / total);
    min_f = std::min(min_f, grid.free_energy[c]);
  }
  for (std::size_t c = 0; c < n_cells; ++c)
    if (grid.occupied_mask[c]) grid.free_energy[c] -= min_f;
  return grid;
}

}  // namespace namdkit::analysis
