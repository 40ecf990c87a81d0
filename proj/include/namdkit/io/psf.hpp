#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "namdkit/io/pdb.hpp"

namespace namdkit {

using AtomPair = std::pair<std::size_t, std::size_t>;

/// Topology read from a PSF file. Indices are 0-based.
struct Topology {
  std::vector<std::string> atom_names;
  std::vector<std::string> res_names;
  std::vector<std::string> elements;
  std::vector<double> masses;
  std::vector<double> charges;
  std::vector<AtomPair> bonds;
  /// (heavy atom, bonded hydrogen), sorted.
  std::vector<AtomPair> donors;
  /// Every N, O and S atom, sorted.
  std::vector<std::size_t> acceptors;

  std::size_t size() const { return masses.size(); }
};

Topology parse_psf(std::string_view text);
/// Minimal CHARMM-style PSF with !NATOM and !NBOND sections only. Residue
/// names default to "UNK" and segment ids to "SYS" when the topology lacks them.
std::string write_psf(const Topology& topology);
Topology read_psf_file(const std::string& path);

/// Element inference used for PSF atoms, which carry no element column.
/// The first letter of the atom name decides (H, C, N, O, S, P); an unbonded
/// atom whose mass disagrees with that guess by more than 1 amu (ions such as
/// POT, SOD, CLA) is assigned by nearest standard weight instead.
std::string psf_element(std::string_view atom_name, double mass, bool bonded);

/// Topology for a structure without a PSF: elements and masses from the PDB,
/// and one bond from each hydrogen to its nearest heavy atom within
/// `max_bond` Å. Charges are zero.
Topology topology_from_structure(const Structure& s, double max_bond = 1.3);

/// Recomputes donors and acceptors from elements and bonds.
void classify_donors_acceptors(Topology& topology);

}  // namespace namdkit
