#include "namdkit/analysis/sasa.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "namdkit/analysis/neighbor_grid.hpp"
#include "namdkit/elements.hpp"
#include "namdkit/error.hpp"
#include "parallel.hpp"
#include "util.hpp"

namespace namdkit::analysis {

std::optional<double> vdw_radius(const std::string& element) {
  if (element == "H") return 1.20;
  if (element == "C") return 1.70;
  if (element == "N") return 1.55;
  if (element == "O") return 1.52;
  if (element == "S") return 1.80;
  if (element == "P") return 1.80;
  return std::nullopt;
}

SasaAtoms sasa_atoms(const Structure& structure, const Selection& sel, const std::map<std::string, double>& overrides,
                     const Topology* topology) {
  sel.check(structure.size());
  if (topology && topology->size() != structure.size())
    throw DomainError("topology has " + std::to_string(topology->size()) + " atoms, structure has " +
                      std::to_string(structure.size()));
  SasaAtoms out;
  out.radii.reserve(sel.size());
  out.polar.reserve(sel.size());
  std::map<std::string, bool> warned;

  std::vector<bool> h_on_polar;
  if (topology) {
    h_on_polar.assign(structure.size(), false);
    for (const auto& [heavy, h] : topology->donors) h_on_polar[h] = true;
  }

  for (std::size_t idx : sel.atom_indices) {
    const auto& atom = structure.atoms[idx];
    double radius = 0;
    if (auto it = overrides.find(atom.element); it != overrides.end()) {
      radius = it->second;
    } else if (auto r = vdw_radius(atom.element)) {
      radius = *r;
    } else if (atom.element != kUnknownElement) {
      radius = kFallbackRadius;
      if (!warned[atom.element]) {
        out.warnings.push_back("no radius for element " + atom.element + " (first seen on atom " + atom.name + "); using " +
                               namdkit::detail::fixed(kFallbackRadius, 2) + " A");
        warned[atom.element] = true;
      }
    } else {
      throw MissingRadiusError("no radius for atom " + std::to_string(atom.serial) + " " + atom.name + " (" +
                               atom.res_name + " " + ResidueKey{atom.chain_id, atom.res_seq, atom.insertion_code}.to_string() +
                               ") with unknown element");
    }
    out.radii.push_back(radius);

    bool polar = is_hbond_element(atom.element);
    if (atom.element == "H") {
      if (topology) {
        polar = h_on_polar[idx];
      } else {
        double best = 1.3 * 1.3;
        std::string nearest;
        for (std::size_t j = 0; j < structure.size(); ++j) {
          if (j == idx || structure.atoms[j].element == "H") continue;
          const double d2 = (structure.atoms[j].position - atom.position).squaredNorm();
          if (d2 <= best) {
            best = d2;
            nearest = structure.atoms[j].element;
          }
        }
        polar = is_hbond_element(nearest);
      }
    }
    out.polar.push_back(polar);
  }
  return out;
}

std::vector<Vec3> sphere_points(int n) {
  if (n < 1) throw DomainError("sphere point count must be positive");
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(n));
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < n; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * k;
    pts.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return pts;
}

namespace {

void check_inputs(const Selection& sel, const SasaAtoms& atoms, double probe, int n_points) {
  if (atoms.radii.size() != sel.size() || atoms.polar.size() != sel.size())
    throw DomainError("SASA atom data does not match the selection size");
  if (!(probe >= 0)) throw DomainError("probe radius must be non-negative");
  if (n_points < 12) throw DomainError("SASA needs at least 12 sphere points");
}

SasaResult sasa_with_points(CoordsView coords, const Selection& sel, const SasaAtoms& atoms, double probe,
                            const std::vector<Vec3>& unit_points) {
  const std::size_t n = sel.size();
  Coords centers = sel.gather(coords);
  std::vector<double> expanded(n);
  double max_radius = 0;
  for (std::size_t k = 0; k < n; ++k) {
    expanded[k] = atoms.radii[k] + probe;
    max_radius = std::max(max_radius, expanded[k]);
  }

  SasaResult result;
  result.per_atom.assign(n, 0.0);
  if (n == 0) return result;

  NeighborGrid grid(centers, 2.0 * max_radius);
  std::vector<std::pair<double, std::size_t>> found;
  std::vector<Vec3> nb_center;
  std::vector<double> nb_r2;
  const double n_pts = static_cast<double>(unit_points.size());

  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& ci = centers[i];
    const double ri = expanded[i];
    found.clear();
    grid.for_each_candidate(ci, [&](std::size_t j) {
      if (j == i) return;
      const double reach = ri + expanded[j];
      const double d2 = (centers[j] - ci).squaredNorm();
      if (d2 < reach * reach) found.emplace_back(d2, j);
    });
    // nearest neighbours first: they bury the most points
    std::sort(found.begin(), found.end());
    nb_center.clear();
    nb_r2.clear();
    for (const auto& [d2, j] : found) {
      nb_center.push_back(centers[j]);
      nb_r2.push_back(expanded[j] * expanded[j]);
    }

    std::size_t exposed = 0;
    std::size_t last = 0;
    const std::size_t m = nb_center.size();
    for (const auto& u : unit_points) {
      const Vec3 p = ci + ri * u;
      bool buried = false;
      if (m > 0 && (p - nb_center[last]).squaredNorm() < nb_r2[last]) {
        buried = true;
      } else {
        for (std::size_t q = 0; q < m; ++q) {
          if ((p - nb_center[q]).squaredNorm() < nb_r2[q]) {
            buried = true;
            last = q;
            break;
          }
        }
      }
      if (!buried) ++exposed;
    }
    result.per_atom[i] = 4.0 * std::numbers::pi * ri * ri * static_cast<double>(exposed) / n_pts;
  }

  for (std::size_t k = 0; k < n; ++k) {
    result.total += result.per_atom[k];
    (atoms.polar[k] ? result.polar : result.apolar) += result.per_atom[k];
  }
  return result;
}

}  // namespace

SasaResult sasa_frame(CoordsView coords, const Selection& sel, const SasaAtoms& atoms, double probe, int n_points) {
  sel.check(coords.size());
  check_inputs(sel, atoms, probe, n_points);
  return sasa_with_points(coords, sel, atoms, probe, sphere_points(n_points));
}

SasaSeries sasa_series(FramesView frames, const Selection& sel, const SasaAtoms& atoms, double probe, int n_points,
                       Parallelism par) {
  check_inputs(sel, atoms, probe, n_points);
  for (const auto& f : frames) sel.check(f.coords.size());
  const auto unit_points = sphere_points(n_points);

  std::vector<SasaResult> results(frames.size());
  detail::parallel_for(frames.size(), par, [&](std::size_t f) {
    results[f] = sasa_with_points(frames[f].coords, sel, atoms, probe, unit_points);
  });

  SasaSeries out;
  out.total = {"SASA", "Å²", {}};
  out.polar = {"SASA polar", "Å²", {}};
  out.apolar = {"SASA apolar", "Å²", {}};
  for (std::size_t f = 0; f < frames.size(); ++f) {
    out.total.points.push_back({frames[f].index, results[f].total});
    out.polar.points.push_back({frames[f].index, results[f].polar});
    out.apolar.points.push_back({frames[f].index, results[f].apolar});
    out.per_atom.push_back(std::move(results[f].per_atom));
  }
  return out;
}

}  // namespace namdkit::analysis
