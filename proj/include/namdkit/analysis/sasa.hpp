#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "namdkit/analysis/selection.hpp"
#include "namdkit/analysis/series.hpp"
#include "namdkit/io/psf.hpp"

namespace namdkit::analysis {

inline constexpr double kDefaultProbeRadius = 1.4;
inline constexpr int kDefaultSpherePoints = 960;

struct SasaResult {
  double total = 0.0;
  std::vector<double> per_atom;  // selection order
  double polar = 0.0;
  double apolar = 0.0;
};

/// Per selected atom: van der Waals radius and polar flag.
struct SasaAtoms {
  std::vector<double> radii;
  std::vector<bool> polar;
  std::vector<std::string> warnings;
};

/// Radius table in Å: H 1.20, C 1.70, N 1.55, O 1.52, S 1.80, P 1.80.
std::optional<double> vdw_radius(const std::string& element);
inline constexpr double kFallbackRadius = 1.70;

/// Builds radii and polar flags for `sel`. Recognised elements missing from
/// the radius table get kFallbackRadius plus a warning; unknown elements ("X")
/// without an entry in `overrides` throw MissingRadiusError naming the atom.
/// Polar atoms are N, O, S and hydrogens bonded to them; bonds come from
/// `topology` when given, otherwise a hydrogen counts as bonded to the
/// nearest heavy atom within 1.3 Å in `structure`.
SasaAtoms sasa_atoms(const Structure& structure, const Selection& sel,
                     const std::map<std::string, double>& overrides = {}, const Topology* topology = nullptr);

/// Deterministic golden-spiral points on the unit sphere.
std::vector<Vec3> sphere_points(int n);

/// Shrake-Rupley SASA of the selected atoms. Only selected atoms occlude.
SasaResult sasa_frame(CoordsView coords, const Selection& sel, const SasaAtoms& atoms,
                      double probe = kDefaultProbeRadius, int n_points = kDefaultSpherePoints);

struct SasaSeries {
  TimeSeries total;
  TimeSeries polar;
  TimeSeries apolar;
  /// per_atom[f][k]: frame f, selected atom k.
  std::vector<std::vector<double>> per_atom;
};

SasaSeries sasa_series(FramesView frames, const Selection& sel, const SasaAtoms& atoms,
                       double probe = kDefaultProbeRadius, int n_points = kDefaultSpherePoints, Parallelism par = {});

}  // namespace namdkit::analysis
