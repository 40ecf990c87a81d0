#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "namdkit/types.hpp"

namespace namdkit {

struct AtomRecord {
  int serial = 1;
  std::string name;
  std::optional<char> alt_loc;
  std::string res_name;
  char chain_id = ' ';
  int res_seq = 0;
  std::optional<char> insertion_code;
  Vec3 position = Vec3::Zero();
  double occupancy = 1.0;
  double b_factor = 0.0;
  std::string element = "X";
  double mass = 0.0;
  bool is_hetero = false;
};

struct ResidueKey {
  char chain_id = ' ';
  int res_seq = 0;
  std::optional<char> insertion_code;

  auto operator<=>(const ResidueKey&) const = default;
  std::string to_string() const;
};

/// Contiguous run of atoms sharing a ResidueKey: atoms [begin, end).
struct Residue {
  ResidueKey key;
  std::string name;
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct Structure {
  std::vector<AtomRecord> atoms;
  std::vector<Residue> residues;
  std::string source_label;
  /// Atoms skipped because their alternate location was neither blank nor 'A'.
  std::vector<ResidueKey> dropped_altlocs;

  std::size_t size() const { return atoms.size(); }
  Coords coordinates() const;
  std::vector<double> masses() const;
  /// Residue that owns atom `atom_index`.
  const Residue& residue_of(std::size_t atom_index) const;
};

/// Parses ATOM/HETATM records of the first MODEL. Throws ParseError on a bad
/// coordinate field and EmptyStructureError when no atoms are found.
Structure parse_pdb(std::string_view text, std::string source_label = {});
Structure read_pdb_file(const std::string& path);

/// Fixed-column PDB output (ATOM/HETATM records + END).
std::string write_pdb(const Structure& structure);
std::string write_pdb(const Structure& structure, CoordsView coords);

/// Rebuilds the residue index from atom order.
void index_residues(Structure& structure);

}  // namespace namdkit
