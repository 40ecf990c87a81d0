#include "namdkit/analysis/drift.hpp"

#include <cmath>

#include "namdkit/error.hpp"

namespace namdkit::analysis {

const char* to_string(DriftVerdict v) { return v == DriftVerdict::stable ? "stable" : "atypical"; }

DriftReport drift_check(const TimeSeries& rmsd, const DriftOptions& options) {
  const std::size_t n = rmsd.size();
  if (n < 10) throw InsufficientDataError("drift check needs at least 10 points, got " + std::to_string(n));
  if (!(options.window_fraction > 0 && options.window_fraction <= 1))
    throw DomainError("window_fraction must lie in (0, 1]");
  if (!(options.ns_per_frame > 0)) throw DomainError("ns_per_frame must be positive");

  std::size_t window = static_cast<std::size_t>(std::ceil(options.window_fraction * static_cast<double>(n)));
  window = std::max<std::size_t>(window, 2);
  const std::size_t first = n - window;

  double mean_t = 0, mean_y = 0;
  for (std::size_t i = first; i < n; ++i) {
    mean_t += static_cast<double>(rmsd.points[i].frame_index) * options.ns_per_frame;
    mean_y += rmsd.points[i].value;
  }
  mean_t /= static_cast<double>(window);
  mean_y /= static_cast<double>(window);
  double sxx = 0, sxy = 0;
  for (std::size_t i = first; i < n; ++i) {
    const double dt = static_cast<double>(rmsd.points[i].frame_index) * options.ns_per_frame - mean_t;
    sxx += dt * dt;
    sxy += dt * (rmsd.points[i].value - mean_y);
  }

  DriftReport report;
  report.window_points = window;
  report.slope = sxx > 0 ? sxy / sxx : 0.0;
  report.mean_level = mean_y;
  const bool steep = std::abs(report.slope) > options.slope_tol;
  const bool high = report.mean_level > options.level_tol;
  if (steep || high) {
    report.verdict = DriftVerdict::atypical;
    if (steep)
      report.reason = "trailing slope " + std::to_string(report.slope) + " Å/ns exceeds " + std::to_string(options.slope_tol);
    if (high) {
      if (!report.reason.empty()) report.reason += "; ";
      report.reason += "trailing mean " + std::to_string(report.mean_level) + " Å exceeds " + std::to_string(options.level_tol);
    }
  }
  return report;
}

}  // namespace namdkit::analysis
