#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "namdkit/io/pdb.hpp"

namespace namdkit::analysis {

struct SeriesPoint {
  std::int64_t frame_index = 0;
  double value = 0.0;
  bool operator==(const SeriesPoint&) const = default;
};

/// Per-frame scalar with name and unit, e.g. ("RMSD", "Å").
struct TimeSeries {
  std::string name;
  std::string unit;
  std::vector<SeriesPoint> points;

  std::size_t size() const { return points.size(); }
  std::vector<double> values() const;
  bool operator==(const TimeSeries&) const = default;
};

struct ResidueValue {
  ResidueKey residue;
  std::string res_name;
  double value = 0.0;
  bool operator==(const ResidueValue&) const = default;
};

/// One value per selected atom, plus the unweighted per-residue mean.
struct PerAtomSeries {
  std::string name;
  std::string unit;
  std::vector<std::size_t> atom_indices;
  std::vector<double> values;
  /// For each value, its entry in residue_rollup.
  std::vector<std::size_t> residue_slot;
  std::vector<ResidueValue> residue_rollup;

  /// Recomputes residue_rollup values as means of `values` per slot.
  void recompute_rollup();
  bool operator==(const PerAtomSeries&) const = default;
};

/// Number of worker threads for frame-parallel operations; 0 picks the
/// hardware concurrency. Results never depend on this value.
struct Parallelism {
  unsigned threads = 0;
};

}  // namespace namdkit::analysis
