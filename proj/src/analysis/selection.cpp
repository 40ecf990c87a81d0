#include "namdkit/analysis/selection.hpp"

#include <algorithm>
#include <array>

#include "namdkit/error.hpp"
#include "../util.hpp"

namespace namdkit::analysis {

void Selection::check(std::size_t n_atoms) const {
  for (std::size_t k = 0; k < atom_indices.size(); ++k) {
    if (atom_indices[k] >= n_atoms)
      throw DomainError("selection '" + label + "' index " + std::to_string(atom_indices[k]) + " out of range for " +
                        std::to_string(n_atoms) + " atoms");
    if (k > 0 && atom_indices[k] <= atom_indices[k - 1])
      throw DomainError("selection '" + label + "' indices are not strictly increasing");
  }
}

Coords Selection::gather(CoordsView coords) const {
  Coords out;
  gather_into(coords, out);
  return out;
}

void Selection::gather_into(CoordsView coords, Coords& out) const {
  out.resize(atom_indices.size());
  for (std::size_t k = 0; k < atom_indices.size(); ++k) out[k] = coords[atom_indices[k]];
}

std::vector<double> Selection::gather(std::span<const double> values) const {
  std::vector<double> out(atom_indices.size());
  for (std::size_t k = 0; k < atom_indices.size(); ++k) out[k] = values[atom_indices[k]];
  return out;
}

Selection make_selection(std::vector<std::size_t> indices, std::string label) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return Selection{std::move(indices), std::move(label)};
}

bool is_amino_acid(std::string_view res_name) {
  static constexpr std::array<std::string_view, 20> kStandard{
      "ALA", "ARG", "ASN", "ASP", "CYS", "GLN", "GLU", "GLY", "HIS", "ILE",
      "LEU", "LYS", "MET", "PHE", "PRO", "SER", "THR", "TRP", "TYR", "VAL"};
  return std::find(kStandard.begin(), kStandard.end(), res_name) != kStandard.end();
}

namespace {

template <typename Pred>
Selection select_if(const Structure& s, std::string label, Pred pred) {
  Selection sel{{}, std::move(label)};
  for (std::size_t i = 0; i < s.atoms.size(); ++i)
    if (pred(s.atoms[i])) sel.atom_indices.push_back(i);
  return sel;
}

}  // namespace

Selection select_all(const Structure& s) {
  return select_if(s, "all", [](const AtomRecord&) { return true; });
}

Selection select_protein(const Structure& s) {
  return select_if(s, "protein", [](const AtomRecord& a) { return is_amino_acid(a.res_name); });
}

Selection select_calpha(const Structure& s) {
  return select_if(s, "protein-CA", [](const AtomRecord& a) { return is_amino_acid(a.res_name) && a.name == "CA"; });
}

Selection select_backbone(const Structure& s) {
  return select_if(s, "protein-backbone", [](const AtomRecord& a) {
    return is_amino_acid(a.res_name) && (a.name == "N" || a.name == "CA" || a.name == "C" || a.name == "O");
  });
}

Selection select_protein_heavy(const Structure& s) {
  return select_if(s, "protein-heavy", [](const AtomRecord& a) { return is_amino_acid(a.res_name) && a.element != "H"; });
}

Selection select(const Structure& s, std::string_view expression) {
  const auto expr = detail::trim(expression);
  if (expr == "all") return select_all(s);
  if (expr == "protein") return select_protein(s);
  if (expr == "ca") return select_calpha(s);
  if (expr == "backbone") return select_backbone(s);
  if (expr == "heavy") return select_protein_heavy(s);
  if (expr.starts_with("index")) {
    const auto range = detail::trim(expr.substr(5));
    const auto dash = range.find('-');
    const auto first = detail::parse_number<std::size_t>(range.substr(0, dash));
    const auto last = dash == std::string_view::npos ? first : detail::parse_number<std::size_t>(range.substr(dash + 1));
    if (!first || !last || *last < *first) throw DomainError("bad index range '" + std::string(expr) + "'");
    if (*last >= s.size())
      throw DomainError("index range '" + std::string(expr) + "' exceeds " + std::to_string(s.size()) + " atoms");
    std::vector<std::size_t> idx;
    for (std::size_t i = *first; i <= *last; ++i) idx.push_back(i);
    return Selection{std::move(idx), std::string(expr)};
  }
  throw DomainError("unknown selection '" + std::string(expr) + "' (expected all, protein, ca, backbone, heavy or index A-B)");
}

}  // namespace namdkit::analysis
