#pragma once

#include <string>

#include "namdkit/analysis/series.hpp"

namespace namdkit::analysis {

struct DriftOptions {
  double window_fraction = 0.5;
  double slope_tol = 2.0;  // Å per ns
  double level_tol = 8.0;  // Å
  double ns_per_frame = 0.01;
};

enum class DriftVerdict { stable, atypical };

struct DriftReport {
  DriftVerdict verdict = DriftVerdict::stable;
  double slope = 0.0;       // Å/ns over the trailing window
  double mean_level = 0.0;  // Å over the trailing window
  std::size_t window_points = 0;
  std::string reason;
};

/// Least-squares slope and mean of the trailing window of an RMSD series.
/// Atypical iff |slope| > slope_tol or mean > level_tol. Throws
/// InsufficientDataError for fewer than 10 points.
DriftReport drift_check(const TimeSeries& rmsd, const DriftOptions& options = {});

const char* to_string(DriftVerdict v);

}  // namespace namdkit::analysis
