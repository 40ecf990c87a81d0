#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace namdkit {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Coords = std::vector<Vec3>;
using CoordsView = std::span<const Vec3>;

/// Periodic cell: lengths in Å, angles in degrees.
struct UnitCell {
  double a = 0, b = 0, c = 0;
  double alpha = 90, beta = 90, gamma = 90;

  bool is_orthorhombic(double tol = 1e-6) const;
  bool operator==(const UnitCell&) const = default;
};

struct Frame {
  std::int64_t index = 0;
  Coords coords;
  std::optional<UnitCell> unit_cell;
};

using FramesView = std::span<const Frame>;

}  // namespace namdkit
