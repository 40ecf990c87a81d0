#include "namdkit/io/pdb.hpp"

#include <cctype>
#include <stdexcept>

#include "namdkit/elements.hpp"
#include "namdkit/error.hpp"
#include "../util.hpp"

namespace namdkit {

using detail::columns;
using detail::trim;

std::string ResidueKey::to_string() const {
  std::string out;
  out += chain_id == ' ' ? '_' : chain_id;
  out += ':' + std::to_string(res_seq);
  if (insertion_code) out += *insertion_code;
  return out;
}

Coords Structure::coordinates() const {
  Coords out;
  out.reserve(atoms.size());
  for (const auto& a : atoms) out.push_back(a.position);
  return out;
}

std::vector<double> Structure::masses() const {
  std::vector<double> out;
  out.reserve(atoms.size());
  for (const auto& a : atoms) out.push_back(a.mass);
  return out;
}

const Residue& Structure::residue_of(std::size_t atom_index) const {
  // residues are sorted by begin
  std::size_t lo = 0, hi = residues.size();
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (residues[mid].begin <= atom_index)
      lo = mid;
    else
      hi = mid;
  }
  if (residues.empty() || atom_index >= residues[lo].end)
    throw DomainError("atom index " + std::to_string(atom_index) + " has no residue");
  return residues[lo];
}

void index_residues(Structure& s) {
  s.residues.clear();
  for (std::size_t i = 0; i < s.atoms.size(); ++i) {
    const auto& a = s.atoms[i];
    ResidueKey key{a.chain_id, a.res_seq, a.insertion_code};
    if (s.residues.empty() || s.residues.back().key != key || s.residues.back().name != a.res_name)
      s.residues.push_back(Residue{key, a.res_name, i, i});
    s.residues.back().end = i + 1;
  }
}

namespace {

std::optional<char> optional_char(std::string_view col) {
  if (col.empty() || col[0] == ' ') return std::nullopt;
  return col[0];
}

std::string element_for(std::string_view element_cols, std::string_view name) {
  if (!trim(element_cols).empty()) return normalize_element(element_cols);
  for (char c : name)
    if (std::isalpha(static_cast<unsigned char>(c))) return normalize_element(std::string_view(&c, 1));
  return std::string(kUnknownElement);
}

}  // namespace

Structure parse_pdb(std::string_view text, std::string source_label) {
  Structure s;
  s.source_label = std::move(source_label);
  int next_serial = 1;
  bool in_model = false;
  bool done = false;

  detail::for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const auto record = trim(columns(line, 1, 6));
    if (record == "MODEL") {
      if (!s.atoms.empty()) done = true;
      in_model = true;
      return !done;
    }
    if (record == "ENDMDL") {
      if (!s.atoms.empty()) done = true;
      in_model = false;
      return !done;
    }
    if (record == "END") return false;
    if (record != "ATOM" && record != "HETATM") return true;

    AtomRecord atom;
    atom.is_hetero = record == "HETATM";
    atom.alt_loc = optional_char(columns(line, 17, 17));
    atom.name = std::string(trim(columns(line, 13, 16)));
    atom.res_name = std::string(trim(columns(line, 18, 20)));
    const auto chain = columns(line, 22, 22);
    atom.chain_id = chain.empty() ? ' ' : chain[0];
    atom.insertion_code = optional_char(columns(line, 27, 27));

    const auto res_seq = detail::parse_number<int>(columns(line, 23, 26));
    atom.res_seq = res_seq.value_or(0);

    const char* axes = "xyz";
    for (int k = 0; k < 3; ++k) {
      const auto v = detail::parse_number<double>(columns(line, 31 + 8 * k, 38 + 8 * k));
      if (!v || !std::isfinite(*v))
        throw ParseError(std::string("malformed ") + axes[k] + " coordinate in " +
                             std::string(record) + " record",
                         line_no);
      atom.position[k] = *v;
    }
    atom.occupancy = detail::parse_number<double>(columns(line, 55, 60)).value_or(1.0);
    atom.b_factor = detail::parse_number<double>(columns(line, 61, 66)).value_or(0.0);

    if (atom.alt_loc && *atom.alt_loc != 'A') {
      ResidueKey key{atom.chain_id, atom.res_seq, atom.insertion_code};
      s.dropped_altlocs.push_back(key);
      return true;
    }

    const auto serial = detail::parse_number<int>(columns(line, 7, 11));
    atom.serial = serial && *serial >= 1 ? *serial : next_serial;
    next_serial = atom.serial + 1;

    atom.element = element_for(columns(line, 77, 78), columns(line, 13, 16));
    atom.mass = standard_atomic_weight(atom.element).value_or(unknown_element_mass());
    s.atoms.push_back(std::move(atom));
    return true;
  });
  (void)in_model;

  if (s.atoms.empty()) throw EmptyStructureError("no ATOM/HETATM records found");
  index_residues(s);
  return s;
}

Structure read_pdb_file(const std::string& path) {
  const auto text = detail::read_text_file(path);
  try {
    return parse_pdb(text, path);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

namespace {

std::string atom_name_field(const AtomRecord& a) {
  // four-character names start in column 13, shorter ones in column 14
  if (a.name.size() >= 4 || a.element.size() == 2) return detail::pad_right(a.name.substr(0, 4), 4);
  return detail::pad_right(" " + a.name, 4);
}

}  // namespace

std::string write_pdb(const Structure& structure, CoordsView coords) {
  if (coords.size() != structure.atoms.size())
    throw DomainError("write_pdb: coordinate count does not match atom count");
  std::string out;
  out.reserve(structure.atoms.size() * 81 + 4);
  for (std::size_t i = 0; i < structure.atoms.size(); ++i) {
    const auto& a = structure.atoms[i];
    std::string line = detail::pad_right(a.is_hetero ? "HETATM" : "ATOM", 6);
    line += detail::pad_left(std::to_string(a.serial % 100000), 5);
    line += ' ';
    line += atom_name_field(a);
    line += a.alt_loc.value_or(' ');
    line += detail::pad_left(a.res_name.substr(0, 3), 3);
    line += ' ';
    line += a.chain_id;
    line += detail::pad_left(std::to_string(a.res_seq % 10000), 4);
    line += a.insertion_code.value_or(' ');
    line += "   ";
    for (int k = 0; k < 3; ++k) line += detail::pad_left(detail::fixed(coords[i][k], 3), 8);
    line += detail::pad_left(detail::fixed(a.occupancy, 2), 6);
    line += detail::pad_left(detail::fixed(a.b_factor, 2), 6);
    line += "          ";
    std::string element = a.element == kUnknownElement ? std::string() : a.element;
    for (auto& c : element) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    line += detail::pad_left(element, 2);
    line += '\n';
    out += line;
  }
  out += "END\n";
  return out;
}

std::string write_pdb(const Structure& structure) {
  const auto coords = structure.coordinates();
  return write_pdb(structure, coords);
}

}  // namespace namdkit
