#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "namdkit/io/pdb.hpp"
#include "namdkit/types.hpp"

namespace namdkit::analysis {

/// Sorted, unique atom indices plus a human-readable label.
struct Selection {
  std::vector<std::size_t> atom_indices;
  std::string label;

  std::size_t size() const { return atom_indices.size(); }
  bool empty() const { return atom_indices.empty(); }

  /// Throws DomainError unless indices are strictly increasing and < n_atoms.
  void check(std::size_t n_atoms) const;
  /// Coordinates of the selected atoms, in selection order.
  Coords gather(CoordsView coords) const;
  void gather_into(CoordsView coords, Coords& out) const;
  std::vector<double> gather(std::span<const double> values) const;
};

/// Sorts and de-duplicates the given indices.
Selection make_selection(std::vector<std::size_t> indices, std::string label);

bool is_amino_acid(std::string_view res_name);

Selection select_all(const Structure& s);
/// Atoms of standard amino-acid residues.
Selection select_protein(const Structure& s);
/// "CA" atoms of standard amino-acid residues.
Selection select_calpha(const Structure& s);
/// N, CA, C and O of standard amino-acid residues.
Selection select_backbone(const Structure& s);
/// Non-hydrogen atoms of standard amino-acid residues.
Selection select_protein_heavy(const Structure& s);

/// Named selections: "all", "protein", "ca", "backbone", "heavy", or an
/// index range "index A-B" / "index A" (0-based, inclusive). Throws
/// DomainError for anything else.
Selection select(const Structure& s, std::string_view expression);

}  // namespace namdkit::analysis
