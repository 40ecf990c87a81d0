#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "namdkit/analysis/series.hpp"

namespace namdkit::analysis {

/// Free energy over (Rg, RMSD) bins in kT, shifted so the occupied minimum is 0.
/// Cells are stored row-major: index = rg_bin * n_rmsd + rmsd_bin.
struct FesGrid {
  std::vector<double> rg_edges;
  std::vector<double> rmsd_edges;
  std::vector<std::size_t> counts;
  std::vector<double> free_energy;  // NaN where unoccupied
  std::vector<bool> occupied_mask;

  std::size_t n_rg() const { return rg_edges.size() - 1; }
  std::size_t n_rmsd() const { return rmsd_edges.size() - 1; }
  std::size_t cell(std::size_t rg_bin, std::size_t rmsd_bin) const { return rg_bin * n_rmsd() + rmsd_bin; }
};

using ValueRange = std::pair<double, double>;

/// 2D histogram with n_bins equal-width bins per axis over [min, max] of each
/// series (or the given ranges; the upper edge is inclusive) and
/// F = -ln(count / total). Throws DomainError when frame indices differ or a
/// value falls outside an explicit range, DegenerateInputError on a zero range.
FesGrid free_energy_surface(const TimeSeries& rg, const TimeSeries& rmsd, int n_bins,
                            std::optional<ValueRange> rg_range = std::nullopt,
                            std::optional<ValueRange> rmsd_range = std::nullopt);

}  // namespace namdkit::analysis
