#include "namdkit/analysis/neighbor_grid.hpp"

#include <algorithm>
#include <cmath>

#include "namdkit/error.hpp"

namespace namdkit::analysis {
namespace {

// keeps sparse, widely spread point sets from allocating huge grids
constexpr double kMaxCellsPerPoint = 8.0;

}  // namespace

NeighborGrid::NeighborGrid(CoordsView points, double cell_size, std::optional<UnitCell> periodic) {
  if (!(cell_size > 0)) throw DomainError("neighbor grid cell size must be positive");
  if (periodic) {
    if (!periodic->is_orthorhombic()) throw UnsupportedCellError("neighbor grid supports orthorhombic cells only");
    periodic_ = true;
    box_ = Vec3(periodic->a, periodic->b, periodic->c);
    if (!(box_.minCoeff() > 0)) throw DomainError("cell lengths must be positive");
    for (int k = 0; k < 3; ++k) {
      dims_[k] = std::max(1L, static_cast<long>(std::floor(box_[k] / cell_size)));
      width_[k] = box_[k] / static_cast<double>(dims_[k]);
    }
  } else if (!points.empty()) {
    Vec3 lo = points[0], hi = points[0];
    for (const auto& p : points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    origin_ = lo;
    double size = cell_size;
    const double budget = kMaxCellsPerPoint * static_cast<double>(points.size()) + 64.0;
    for (;;) {
      double total = 1;
      for (int k = 0; k < 3; ++k) {
        dims_[k] = static_cast<long>(std::floor((hi[k] - lo[k]) / size)) + 1;
        total *= static_cast<double>(dims_[k]);
      }
      if (total <= budget) break;
      size *= 1.5;
    }
    width_ = Vec3::Constant(size);
  }

  const std::size_t n_cells = static_cast<std::size_t>(dims_[0] * dims_[1] * dims_[2]);
  std::vector<std::size_t> cell_of(points.size());
  cell_start_.assign(n_cells + 1, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::array<long, 3> c{};
    locate(points[i], c);
    cell_of[i] = flat(c[0], c[1], c[2]);
    ++cell_start_[cell_of[i] + 1];
  }
  for (std::size_t c = 0; c < n_cells; ++c) cell_start_[c + 1] += cell_start_[c];
  sorted_.resize(points.size());
  std::vector<std::size_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < points.size(); ++i) sorted_[fill[cell_of[i]]++] = i;
}

bool NeighborGrid::locate(const Vec3& x, std::array<long, 3>& cell) const {
  for (int k = 0; k < 3; ++k) {
    if (periodic_) {
      double w = x[k] - box_[k] * std::floor(x[k] / box_[k]);
      long c = static_cast<long>(std::floor(w / width_[k]));
      cell[k] = std::clamp(c, 0L, dims_[k] - 1);
    } else {
      const long c = static_cast<long>(std::floor((x[k] - origin_[k]) / width_[k]));
      // queries outside the box still see the boundary layer of cells
      if (c < -1 || c > dims_[k]) return false;
      cell[k] = c;
    }
  }
  return true;
}

int NeighborGrid::neighbor_cells(int axis, long center, std::array<long, 3>& out) const {
  const long n = dims_[axis];
  int count = 0;
  if (periodic_) {
    if (n < 3) {
      for (long c = 0; c < n; ++c) out[count++] = c;
      return count;
    }
    for (long d = -1; d <= 1; ++d) out[count++] = ((center + d) % n + n) % n;
    return count;
  }
  for (long d = -1; d <= 1; ++d) {
    const long c = center + d;
    if (c >= 0 && c < n) out[count++] = c;
  }
  return count;
}

}  // namespace namdkit::analysis
