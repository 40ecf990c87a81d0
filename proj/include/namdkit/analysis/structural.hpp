#pragma once

#include <span>

#include "namdkit/analysis/selection.hpp"
#include "namdkit/analysis/series.hpp"
#include "namdkit/types.hpp"

namespace namdkit::analysis {

/// RMSD of the selected atoms of every frame against the same atoms of
/// `reference`, optionally after Kabsch superposition. Unit Å.
TimeSeries rmsd_series(FramesView frames, CoordsView reference, const Selection& sel, bool superpose = true,
                       Parallelism par = {});

struct AverageStructure {
  Coords coords;  // selected atoms only
  int iterations = 0;
  bool converged = false;
};

/// Iterative mean: start from the plain coordinate average, superpose every
/// frame onto the current mean, re-average, and stop once the mean moves
/// (RMSD between successive means) by less than `tol` or after `max_iter`
/// passes. Throws DomainError for an empty trajectory.
AverageStructure average_structure(FramesView frames, const Selection& sel, int max_iter = 50, double tol = 1e-6,
                                   Parallelism par = {});

struct RmsfOptions {
  bool superpose = true;
  int max_iter = 50;
  double tol = 1e-6;
};

/// Per-atom RMS fluctuation about the average structure. With superposition
/// every frame is first fitted onto the converged average. Residue rollup
/// uses `structure` residue membership. Throws DegenerateInputError for
/// fewer than two frames.
PerAtomSeries rmsf(FramesView frames, const Structure& structure, const Selection& sel, RmsfOptions options = {},
                   Parallelism par = {});

/// Isotropic B-factor from RMSF: B = 8*pi^2/3 * RMSF^2 (Å^2).
PerAtomSeries rmsf_to_bfactor(const PerAtomSeries& rmsf);

/// Mass-weighted radius of gyration of the selection per frame. `masses` is
/// per atom of the full system. Unit Å.
TimeSeries radius_of_gyration_series(FramesView frames, const Selection& sel, std::span<const double> masses,
                                     Parallelism par = {});

}  // namespace namdkit::analysis
