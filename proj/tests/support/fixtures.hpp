#pragma once

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "namdkit/io/pdb.hpp"
#include "namdkit/io/psf.hpp"
#include "namdkit/types.hpp"
#include "oracles.hpp"

namespace fixtures {

using namdkit::Coords;
using namdkit::Frame;
using namdkit::Vec3;

/// One ATOM/HETATM line in standard fixed columns.
inline std::string pdb_atom(int serial, std::string name, const std::string& res, char chain, int seq, double x, double y,
                            double z, const std::string& element = "", bool hetero = false, char alt = ' ') {
  if (name.size() < 4) name = " " + name;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-6s%5d %-4s%c%-3s %c%4d    %8.3f%8.3f%8.3f%6.2f%6.2f          %2s",
                hetero ? "HETATM" : "ATOM", serial, name.c_str(), alt, res.c_str(), chain, seq, x, y, z, 1.0, 0.0,
                element.c_str());
  return buf;
}

/// Straight-chain ALA peptide along x with N, H, CA, CB, C, O per residue and
/// 1.33 Å peptide bonds.
inline std::string peptide_pdb(int n_res, char chain = 'A', Vec3 origin = Vec3::Zero()) {
  std::string out;
  int serial = 1;
  for (int i = 0; i < n_res; ++i) {
    const Vec3 n = origin + Vec3(3.8 * i, 0, 0);
    const Vec3 h = n + Vec3(0, -1.0, 0);
    const Vec3 ca = n + Vec3(1.2, 0.8, 0);
    const Vec3 cb = ca + Vec3(0, 0, 1.5);
    const Vec3 c = n + Vec3(2.5, 0.3, 0);
    const Vec3 o = c + Vec3(0, 1.23, 0);
    const std::pair<const char*, Vec3> atoms[] = {{"N", n}, {"H", h}, {"CA", ca}, {"CB", cb}, {"C", c}, {"O", o}};
    for (const auto& [name, p] : atoms)
      out += pdb_atom(serial++, name, "ALA", chain, i + 1, p.x(), p.y(), p.z(), std::string(1, name[0])) + "\n";
  }
  out += "END\n";
  return out;
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline Coords random_cloud(std::mt19937_64& rng, std::size_t n, double half_width = 10.0) {
  std::uniform_real_distribution<double> u(-half_width, half_width);
  Coords out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(u(rng), u(rng), u(rng));
  return out;
}

inline std::vector<oracle::P> plain(const Coords& c) {
  std::vector<oracle::P> out;
  for (const auto& v : c) out.push_back({v.x(), v.y(), v.z()});
  return out;
}

inline std::vector<Frame> frames_of(const std::vector<Coords>& coords) {
  std::vector<Frame> out;
  for (std::size_t f = 0; f < coords.size(); ++f) out.push_back({static_cast<std::int64_t>(f), coords[f], std::nullopt});
  return out;
}

/// Topology with arbitrary elements and the given bonds; donors and
/// acceptors are derived by the library's classifier.
inline namdkit::Topology topology(const std::vector<std::string>& elements, const std::vector<namdkit::AtomPair>& bonds) {
  namdkit::Topology t;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    t.atom_names.push_back(elements[i] + std::to_string(i + 1));
    t.res_names.push_back("UNK");
    t.elements.push_back(elements[i]);
    t.masses.push_back(elements[i] == "H" ? 1.008 : 14.0);
    t.charges.push_back(0.0);
  }
  t.bonds = bonds;
  namdkit::classify_donors_acceptors(t);
  return t;
}

/// Random H-bond fixture: `n_donors` N-H pairs with 1 Å bonds and
/// `n_acceptors` lone O atoms, uniformly placed in a cube.
struct HBondFixture {
  Coords coords;
  namdkit::Topology topology;
};

inline HBondFixture random_hbond_fixture(std::mt19937_64& rng, std::size_t n_donors, std::size_t n_acceptors,
                                         double edge) {
  std::uniform_real_distribution<double> u(0.0, edge);
  std::normal_distribution<double> g;
  HBondFixture f;
  std::vector<std::string> elements;
  std::vector<namdkit::AtomPair> bonds;
  for (std::size_t i = 0; i < n_donors; ++i) {
    const Vec3 d(u(rng), u(rng), u(rng));
    Vec3 dir(g(rng), g(rng), g(rng));
    dir.normalize();
    bonds.emplace_back(f.coords.size(), f.coords.size() + 1);
    f.coords.push_back(d);
    f.coords.push_back(d + dir);
    elements.push_back(i % 3 == 0 ? "O" : "N");
    elements.push_back("H");
  }
  for (std::size_t i = 0; i < n_acceptors; ++i) {
    f.coords.emplace_back(u(rng), u(rng), u(rng));
    elements.push_back(i % 4 == 0 ? "S" : "O");
  }
  f.topology = topology(elements, bonds);
  return f;
}

}  // namespace fixtures
