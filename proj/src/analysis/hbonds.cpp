#include "namdkit/analysis/hbonds.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Geometry>

#include "namdkit/analysis/neighbor_grid.hpp"
#include "namdkit/error.hpp"
#include "namdkit/geometry.hpp"
#include "parallel.hpp"

namespace namdkit::analysis {
namespace {

double angle_deg(const Vec3& u, const Vec3& v) {
  return std::atan2(u.cross(v).norm(), u.dot(v)) * 180.0 / std::numbers::pi;
}

}  // namespace

std::vector<HBondRecord> detect_hbonds(const Frame& frame, const Topology& topology, HBondOptions options) {
  const auto& x = frame.coords;
  if (topology.size() != x.size())
    throw DomainError("topology has " + std::to_string(topology.size()) + " atoms, frame has " + std::to_string(x.size()));
  if (!(options.dist_cutoff > 0)) throw DomainError("H-bond distance cutoff must be positive");

  std::optional<UnitCell> cell;
  if (options.use_min_image) {
    if (!frame.unit_cell) throw UnsupportedCellError("minimum image requested but frame " + std::to_string(frame.index) + " has no unit cell");
    if (!frame.unit_cell->is_orthorhombic())
      throw UnsupportedCellError("minimum image requires an orthorhombic cell");
    cell = frame.unit_cell;
  }
  auto displacement = [&](const Vec3& from, const Vec3& to) -> Vec3 {
    const Vec3 d = to - from;
    return cell ? geometry::min_image_displacement(d, *cell) : d;
  };

  Coords acceptor_pos;
  acceptor_pos.reserve(topology.acceptors.size());
  for (std::size_t a : topology.acceptors) acceptor_pos.push_back(x[a]);
  const double max_dist = options.dist_cutoff + kHBondCutoffSlack;
  // cells strictly wider than the slackened cutoff keep every candidate within one cell step
  const NeighborGrid grid(acceptor_pos, max_dist * (1.0 + 1e-9) + 1e-9, cell);

  const double min_angle = options.angle_cutoff - kHBondCutoffSlack;
  std::vector<HBondRecord> out;
  for (const auto& [donor, hydrogen] : topology.donors) {
    const Vec3& d = x[donor];
    const Vec3 h_to_d = displacement(x[hydrogen], d);
    grid.for_each_candidate(d, [&](std::size_t k) {
      const std::size_t acceptor = topology.acceptors[k];
      if (acceptor == donor) return;
      const Vec3 d_to_a = displacement(d, x[acceptor]);
      const double dist = d_to_a.norm();
      if (dist > max_dist) return;
      // H->A through D keeps all three atoms in the same periodic image
      const double angle = angle_deg(h_to_d, h_to_d + d_to_a);
      if (angle < min_angle) return;
      out.push_back({donor, hydrogen, acceptor, dist, angle});
    });
  }
  std::sort(out.begin(), out.end(), [](const HBondRecord& a, const HBondRecord& b) { return a.key() < b.key(); });
  return out;
}

HBondTimeline hbond_timeline(FramesView frames, const Topology& topology, HBondOptions options, Parallelism par) {
  std::vector<std::vector<HBondKey>> per_frame(frames.size());
  detail::parallel_for(frames.size(), par, [&](std::size_t f) {
    for (const auto& r : detect_hbonds(frames[f], topology, options)) per_frame[f].push_back(r.key());
  });

  HBondTimeline t;
  for (const auto& f : frames) t.frame_indices.push_back(f.index);
  std::map<HBondKey, std::size_t> slot;
  for (const auto& keys : per_frame)
    for (const auto& k : keys) slot.emplace(k, 0);
  for (auto& [key, index] : slot) {
    index = t.triples.size();
    t.triples.push_back(key);
  }
  t.presence.assign(t.triples.size(), std::vector<std::uint8_t>(frames.size(), 0));
  for (std::size_t f = 0; f < frames.size(); ++f) {
    t.counts_per_frame.push_back(per_frame[f].size());
    for (const auto& k : per_frame[f]) t.presence[slot[k]][f] = 1;
  }
  return t;
}

TimeSeries hbond_count_series(FramesView frames, const Topology& topology, HBondOptions options, Parallelism par) {
  TimeSeries out{"H-bonds", "count", std::vector<SeriesPoint>(frames.size())};
  detail::parallel_for(frames.size(), par, [&](std::size_t f) {
    out.points[f] = {frames[f].index, static_cast<double>(detect_hbonds(frames[f], topology, options).size())};
  });
  return out;
}

std::vector<HBondOccupancy> hbond_persistence(const HBondTimeline& timeline) {
  std::vector<HBondOccupancy> out;
  const double n_frames = static_cast<double>(timeline.frame_indices.size());
  for (std::size_t k = 0; k < timeline.triples.size(); ++k) {
    std::size_t present = 0;
    for (auto v : timeline.presence[k]) present += v;
    out.push_back({timeline.triples[k], static_cast<double>(present) / n_frames});
  }
  std::stable_sort(out.begin(), out.end(), [](const HBondOccupancy& a, const HBondOccupancy& b) {
    if (a.occupancy != b.occupancy) return a.occupancy > b.occupancy;
    return a.triple < b.triple;
  });
  return out;
}

std::vector<HBondOccupancy> hbond_persistence(FramesView frames, const Topology& topology, HBondOptions options,
                                              Parallelism par) {
  if (frames.empty()) throw DomainError("hbond_persistence needs at least one frame");
  return hbond_persistence(hbond_timeline(frames, topology, options, par));
}

CorrelationResult hbond_autocorrelation(const HBondTimeline& timeline, std::size_t max_lag) {
  const std::size_t n_frames = timeline.frame_indices.size();
  if (max_lag >= n_frames)
    throw DomainError("max_lag " + std::to_string(max_lag) + " must be smaller than the frame count " +
                      std::to_string(n_frames));
  CorrelationResult result;
  result.series = {"H-bond C(tau)", "", {}};
  const std::size_t n_triples = timeline.triples.size();
  if (n_triples == 0) {
    result.warnings.emplace_back("no hydrogen bonds observed; correlation undefined");
    return result;
  }

  double norm = 0;
  for (const auto& h : timeline.presence)
    for (auto v : h) norm += v;
  norm /= static_cast<double>(n_triples * n_frames);

  for (std::size_t lag = 0; lag <= max_lag; ++lag) {
    const std::size_t span = n_frames - lag;
    double sum = 0;
    for (const auto& h : timeline.presence)
      for (std::size_t t = 0; t < span; ++t) sum += h[t] & h[t + lag];
    const double mean = sum / static_cast<double>(n_triples * span);
    result.series.points.push_back({static_cast<std::int64_t>(lag), mean / norm});
  }
  return result;
}

CorrelationResult hbond_autocorrelation(FramesView frames, const Topology& topology, std::size_t max_lag,
                                        HBondOptions options, Parallelism par) {
  return hbond_autocorrelation(hbond_timeline(frames, topology, options, par), max_lag);
}

}  // namespace namdkit::analysis
