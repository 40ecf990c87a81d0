#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "namdkit/types.hpp"

namespace namdkit::analysis {

/// Uniform cell list over a point set. With a periodic orthorhombic cell the
/// points are wrapped into the box and neighbouring cells wrap around;
/// otherwise the grid spans the bounding box. Candidates returned by
/// for_each_candidate are a superset of all points within `cell_size` of the
/// query; callers apply their own distance test.
class NeighborGrid {
 public:
  NeighborGrid(CoordsView points, double cell_size, std::optional<UnitCell> periodic = std::nullopt);

  template <typename Fn>
  void for_each_candidate(const Vec3& query, Fn&& fn) const {
    std::array<long, 3> c{};
    if (!locate(query, c)) return;
    std::array<std::array<long, 3>, 3> axis{};
    std::array<int, 3> n_axis{};
    for (int k = 0; k < 3; ++k) n_axis[k] = neighbor_cells(k, c[k], axis[k]);
    for (int i = 0; i < n_axis[0]; ++i)
      for (int j = 0; j < n_axis[1]; ++j)
        for (int l = 0; l < n_axis[2]; ++l) {
          const std::size_t cell = flat(axis[0][i], axis[1][j], axis[2][l]);
          for (std::size_t p = cell_start_[cell]; p < cell_start_[cell + 1]; ++p) fn(sorted_[p]);
        }
  }

  std::size_t cell_count() const { return cell_start_.size() - 1; }

 private:
  bool locate(const Vec3& x, std::array<long, 3>& cell) const;
  int neighbor_cells(int axis, long center, std::array<long, 3>& out) const;
  std::size_t flat(long i, long j, long k) const {
    return (static_cast<std::size_t>(i) * dims_[1] + static_cast<std::size_t>(j)) * dims_[2] + static_cast<std::size_t>(k);
  }

  bool periodic_ = false;
  Vec3 origin_ = Vec3::Zero();
  Vec3 width_ = Vec3::Ones();
  Vec3 box_ = Vec3::Zero();
  std::array<long, 3> dims_{1, 1, 1};
  std::vector<std::size_t> cell_start_;
  std::vector<std::size_t> sorted_;
};

}  // namespace namdkit::analysis
