#pragma once

#include <optional>
#include <span>

#include "namdkit/types.hpp"

namespace namdkit::geometry {

/// Proper rigid transform mapping mobile points onto a reference:
/// x -> rotation * x + translation.
struct Superposition {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double rmsd_after = 0.0;

  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }
  Coords apply(CoordsView xs) const;
};

/// Mass-weighted centroid. Throws DomainError on an empty set, a length
/// mismatch or any non-positive mass.
Vec3 center_of_mass(CoordsView coords, std::span<const double> masses);

/// Weighted centroid with unit weights when `weights` is empty.
Vec3 centroid(CoordsView coords, std::span<const double> weights = {});

/// Optimal proper rotation + translation minimising the weighted squared
/// deviation from `reference` (Kabsch via 3x3 SVD with reflection
/// correction). Coincident inputs yield the identity rotation.
Superposition kabsch(CoordsView mobile, CoordsView reference, std::span<const double> weights = {});

/// sqrt(sum w |a-b|^2 / sum w); unit weights when `weights` is empty.
double rmsd_raw(CoordsView a, CoordsView b, std::span<const double> weights = {});

/// Wraps each component of `d` into [-L/2, L/2). Throws UnsupportedCellError
/// for non-orthorhombic cells and DomainError for non-positive lengths.
Vec3 min_image_displacement(const Vec3& d, const UnitCell& cell);

}  // namespace namdkit::geometry
