#include "namdkit/geometry.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "namdkit/error.hpp"

namespace namdkit::geometry {
namespace {

void check_weights(std::size_t n, std::span<const double> weights) {
  if (weights.empty()) return;
  if (weights.size() != n)
    throw DomainError("weight count " + std::to_string(weights.size()) + " does not match point count " +
                      std::to_string(n));
  for (double w : weights)
    if (!(w > 0)) throw DomainError("weights must be positive");
}

inline double weight_at(std::span<const double> w, std::size_t i) { return w.empty() ? 1.0 : w[i]; }

}  // namespace

Coords Superposition::apply(CoordsView xs) const {
  Coords out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(apply(x));
  return out;
}

Vec3 centroid(CoordsView coords, std::span<const double> weights) {
  if (coords.empty()) throw DomainError("centroid of an empty point set");
  check_weights(coords.size(), weights);
  Vec3 sum = Vec3::Zero();
  double total = 0;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const double w = weight_at(weights, i);
    sum += w * coords[i];
    total += w;
  }
  return sum / total;
}

Vec3 center_of_mass(CoordsView coords, std::span<const double> masses) {
  if (masses.size() != coords.size())
    throw DomainError("mass count " + std::to_string(masses.size()) + " does not match atom count " +
                      std::to_string(coords.size()));
  for (double m : masses)
    if (!(m > 0)) throw DomainError("center_of_mass: masses must be positive");
  return centroid(coords, masses);
}

double rmsd_raw(CoordsView a, CoordsView b, std::span<const double> weights) {
  if (a.size() != b.size())
    throw DomainError("rmsd: point counts differ (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  if (a.empty()) throw DomainError("rmsd of empty point sets");
  check_weights(a.size(), weights);
  double sum = 0, total = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double w = weight_at(weights, i);
    sum += w * (a[i] - b[i]).squaredNorm();
    total += w;
  }
  return std::sqrt(sum / total);
}

Superposition kabsch(CoordsView mobile, CoordsView reference, std::span<const double> weights) {
  if (mobile.size() != reference.size())
    throw DomainError("kabsch: point counts differ (" + std::to_string(mobile.size()) + " vs " +
                      std::to_string(reference.size()) + ")");
  if (mobile.empty()) throw DomainError("kabsch of empty point sets");
  check_weights(mobile.size(), weights);

  const Vec3 mobile_center = centroid(mobile, weights);
  const Vec3 ref_center = centroid(reference, weights);

  // H = sum w (m - cm)(r - cr)^T
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < mobile.size(); ++i)
    h.noalias() += weight_at(weights, i) * (mobile[i] - mobile_center) * (reference[i] - ref_center).transpose();

  Superposition result;
  if (h.cwiseAbs().maxCoeff() > 0.0) {
    Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat3& u = svd.matrixU();
    const Mat3& v = svd.matrixV();
    Mat3 d = Mat3::Identity();
    if ((v * u.transpose()).determinant() < 0) d(2, 2) = -1.0;
    result.rotation = v * d * u.transpose();
  }
  result.translation = ref_center - result.rotation * mobile_center;

  double sum = 0, total = 0;
  for (std::size_t i = 0; i < mobile.size(); ++i) {
    const double w = weight_at(weights, i);
    sum += w * (result.apply(mobile[i]) - reference[i]).squaredNorm();
    total += w;
  }
  result.rmsd_after = std::sqrt(sum / total);
  return result;
}

Vec3 min_image_displacement(const Vec3& d, const UnitCell& cell) {
  if (!cell.is_orthorhombic())
    throw UnsupportedCellError("minimum image requires an orthorhombic cell (angles " + std::to_string(cell.alpha) +
                               ", " + std::to_string(cell.beta) + ", " + std::to_string(cell.gamma) + ")");
  const Vec3 lengths(cell.a, cell.b, cell.c);
  if (!(lengths.minCoeff() > 0)) throw DomainError("cell lengths must be positive");
  Vec3 out;
  for (int k = 0; k < 3; ++k) {
    const double l = lengths[k];
    if (d[k] >= -0.5 * l && d[k] < 0.5 * l) {
      out[k] = d[k];
      continue;
    }
    double r = d[k] - l * std::floor(d[k] / l + 0.5);
    if (r >= 0.5 * l) r -= l;
    if (r < -0.5 * l) r += l;
    out[k] = r;
  }
  return out;
}

}  // namespace namdkit::geometry
