#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "namdkit/analysis/series.hpp"
#include "namdkit/io/psf.hpp"
#include "namdkit/types.hpp"

namespace namdkit::analysis {

struct HBondOptions {
  double dist_cutoff = 3.5;     // donor-acceptor, Å, inclusive
  double angle_cutoff = 120.0;  // D-H...A angle at H, degrees, inclusive
  bool use_min_image = false;
};

/// Slack applied to both cutoffs so values that equal a cutoff up to
/// floating-point rounding count as inside.
inline constexpr double kHBondCutoffSlack = 1e-9;

struct HBondKey {
  std::size_t donor = 0;
  std::size_t hydrogen = 0;
  std::size_t acceptor = 0;
  auto operator<=>(const HBondKey&) const = default;
};

struct HBondRecord {
  std::size_t donor = 0;
  std::size_t hydrogen = 0;
  std::size_t acceptor = 0;
  double distance = 0.0;  // D-A, Å
  double angle = 0.0;     // degrees, 180 is linear

  HBondKey key() const { return {donor, hydrogen, acceptor}; }
};

/// Every (D, H, A) with A != D, |D-A| <= dist_cutoff and angle(H->D, H->A) >=
/// angle_cutoff, sorted by (D, H, A). Acceptor candidates come from a cell
/// grid around each donor heavy atom. Throws UnsupportedCellError when
/// use_min_image is set and the frame has no orthorhombic cell.
std::vector<HBondRecord> detect_hbonds(const Frame& frame, const Topology& topology, HBondOptions options = {});

TimeSeries hbond_count_series(FramesView frames, const Topology& topology, HBondOptions options = {},
                              Parallelism par = {});

/// Presence of every bond ever observed: presence[k][f] for triple k, frame f.
struct HBondTimeline {
  std::vector<std::int64_t> frame_indices;
  std::vector<HBondKey> triples;  // sorted
  std::vector<std::vector<std::uint8_t>> presence;
  std::vector<std::size_t> counts_per_frame;
};

HBondTimeline hbond_timeline(FramesView frames, const Topology& topology, HBondOptions options = {},
                             Parallelism par = {});

struct HBondOccupancy {
  HBondKey triple;
  double occupancy = 0.0;
};

/// Fraction of frames each triple is present in, descending; ties ordered by
/// (D, H, A).
std::vector<HBondOccupancy> hbond_persistence(const HBondTimeline& timeline);
std::vector<HBondOccupancy> hbond_persistence(FramesView frames, const Topology& topology, HBondOptions options = {},
                                              Parallelism par = {});

struct CorrelationResult {
  TimeSeries series;
  std::vector<std::string> warnings;
};

/// Intermittent existence correlation
///   C(tau) = [sum_k sum_{t<T-tau} h_k(t) h_k(t+tau) / (K (T-tau))]
///          / [sum_k sum_t h_k(t)^2 / (K T)]
/// over the K triples ever observed. Points are indexed by lag. Throws
/// DomainError unless max_lag < frame count; no observed bonds gives an empty
/// series with a warning.
CorrelationResult hbond_autocorrelation(const HBondTimeline& timeline, std::size_t max_lag);
CorrelationResult hbond_autocorrelation(FramesView frames, const Topology& topology, std::size_t max_lag,
                                        HBondOptions options = {}, Parallelism par = {});

}  // namespace namdkit::analysis
