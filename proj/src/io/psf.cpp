#include "namdkit/io/psf.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "namdkit/elements.hpp"
#include "namdkit/error.hpp"
#include "../util.hpp"

namespace namdkit {

std::string psf_element(std::string_view atom_name, double mass, bool bonded) {
  std::string guess(kUnknownElement);
  for (char c : atom_name) {
    if (!std::isalpha(static_cast<unsigned char>(c))) continue;
    const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (up == 'H' || up == 'C' || up == 'N' || up == 'O' || up == 'S' || up == 'P') guess = std::string(1, up);
    break;
  }
  // Hydrogen-mass repartitioning moves mass between bonded atoms, so bonded
  // atoms keep the name-based guess.
  if (bonded && guess != kUnknownElement) return guess;
  if (guess != kUnknownElement) {
    const double expected = *standard_atomic_weight(guess);
    if (std::abs(expected - mass) <= 1.0) return guess;
  }
  return element_from_mass(mass);
}

void classify_donors_acceptors(Topology& t) {
  t.donors.clear();
  t.acceptors.clear();
  for (const auto& [i, j] : t.bonds) {
    if (is_hbond_element(t.elements[i]) && t.elements[j] == "H") t.donors.emplace_back(i, j);
    if (is_hbond_element(t.elements[j]) && t.elements[i] == "H") t.donors.emplace_back(j, i);
  }
  std::sort(t.donors.begin(), t.donors.end());
  t.donors.erase(std::unique(t.donors.begin(), t.donors.end()), t.donors.end());
  for (std::size_t i = 0; i < t.elements.size(); ++i)
    if (is_hbond_element(t.elements[i])) t.acceptors.push_back(i);
}

Topology topology_from_structure(const Structure& s, double max_bond) {
  Topology t;
  const auto n = s.size();
  for (const auto& a : s.atoms) {
    t.atom_names.push_back(a.name);
    t.res_names.push_back(a.res_name);
    t.elements.push_back(a.element);
    t.masses.push_back(a.mass);
    t.charges.push_back(0.0);
  }
  for (std::size_t h = 0; h < n; ++h) {
    if (s.atoms[h].element != "H") continue;
    double best = max_bond * max_bond;
    std::optional<std::size_t> partner;
    for (std::size_t j = 0; j < n; ++j) {
      if (s.atoms[j].element == "H") continue;
      const double d2 = (s.atoms[j].position - s.atoms[h].position).squaredNorm();
      if (d2 <= best) {
        best = d2;
        partner = j;
      }
    }
    if (partner) t.bonds.emplace_back(std::min(h, *partner), std::max(h, *partner));
  }
  classify_donors_acceptors(t);
  return t;
}

namespace {

struct Lines {
  std::vector<std::string_view> text;
  std::size_t pos = 0;
  bool done() const { return pos >= text.size(); }
};

bool is_section_header(std::string_view line) { return line.find('!') != std::string_view::npos; }

std::size_t declared_count(std::string_view line, std::size_t line_no) {
  const auto tokens = detail::split_ws(line);
  if (tokens.empty()) throw ParseError("missing section count", line_no);
  const auto n = detail::parse_number<long long>(tokens[0]);
  if (!n || *n < 0) throw ParseError("invalid section count '" + std::string(tokens[0]) + "'", line_no);
  return static_cast<std::size_t>(*n);
}

}  // namespace

Topology parse_psf(std::string_view text) {
  Lines lines;
  detail::for_each_line(text, [&](std::string_view l, std::size_t) {
    lines.text.push_back(l);
    return true;
  });

  auto find_section = [&](std::string_view tag) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < lines.text.size(); ++i)
      if (lines.text[i].find(tag) != std::string_view::npos) return i;
    return std::nullopt;
  };

  const auto natom_at = find_section("!NATOM");
  if (!natom_at) throw ParseError("PSF has no !NATOM section");
  const auto nbond_at = find_section("!NBOND");
  if (!nbond_at) throw ParseError("PSF has no !NBOND section");

  Topology t;
  const std::size_t n_atoms = declared_count(lines.text[*natom_at], *natom_at + 1);
  std::size_t i = *natom_at + 1;
  std::vector<std::string> names;
  while (t.masses.size() < n_atoms) {
    if (i >= lines.text.size() || is_section_header(lines.text[i]) || detail::trim(lines.text[i]).empty())
      throw ParseError("!NATOM declares " + std::to_string(n_atoms) + " atoms but " +
                           std::to_string(t.masses.size()) + " were listed",
                       i + 1);
    const auto tok = detail::split_ws(lines.text[i]);
    if (tok.size() < 8) throw ParseError("atom line has fewer than 8 fields", i + 1);
    const auto charge = detail::parse_number<double>(tok[6]);
    const auto mass = detail::parse_number<double>(tok[7]);
    if (!charge || !mass) throw ParseError("non-numeric charge or mass", i + 1);
    if (!(*mass > 0)) throw ParseError("non-positive atom mass", i + 1);
    t.res_names.emplace_back(tok[3]);
    t.atom_names.emplace_back(tok[4]);
    t.charges.push_back(*charge);
    t.masses.push_back(*mass);
    ++i;
  }

  const std::size_t n_bonds = declared_count(lines.text[*nbond_at], *nbond_at + 1);
  std::vector<long long> values;
  for (i = *nbond_at + 1; i < lines.text.size(); ++i) {
    const auto line = lines.text[i];
    if (is_section_header(line) || detail::trim(line).empty()) break;
    for (auto tok : detail::split_ws(line)) {
      const auto v = detail::parse_number<long long>(tok);
      if (!v) throw ParseError("non-integer bond index '" + std::string(tok) + "'", i + 1);
      values.push_back(*v);
    }
  }
  if (values.size() != 2 * n_bonds)
    throw ParseError("!NBOND declares " + std::to_string(n_bonds) + " bonds but " +
                         std::to_string(values.size() / 2) +
                         (values.size() % 2 ? " and a half" : "") + " were listed",
                     *nbond_at + 1);
  for (std::size_t k = 0; k < n_bonds; ++k) {
    const long long a = values[2 * k], b = values[2 * k + 1];
    if (a < 1 || b < 1 || a > static_cast<long long>(n_atoms) || b > static_cast<long long>(n_atoms))
      throw ParseError("bond " + std::to_string(k + 1) + " (" + std::to_string(a) + ", " + std::to_string(b) +
                           ") references an atom outside 1.." + std::to_string(n_atoms),
                       *nbond_at + 1);
    if (a == b) throw ParseError("bond " + std::to_string(k + 1) + " bonds atom " + std::to_string(a) + " to itself",
                                 *nbond_at + 1);
    t.bonds.emplace_back(static_cast<std::size_t>(a - 1), static_cast<std::size_t>(b - 1));
  }

  std::vector<bool> bonded(n_atoms, false);
  for (const auto& [a, b] : t.bonds) bonded[a] = bonded[b] = true;
  t.elements.reserve(n_atoms);
  for (std::size_t k = 0; k < n_atoms; ++k) t.elements.push_back(psf_element(t.atom_names[k], t.masses[k], bonded[k]));

  classify_donors_acceptors(t);
  return t;
}

Topology read_psf_file(const std::string& path) {
  const auto text = detail::read_text_file(path);
  try {
    return parse_psf(text);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace namdkit

namespace namdkit {

std::string write_psf(const Topology& t) {
  std::string out = "PSF\n\n       1 !NTITLE\n REMARKS generated by namdkit\n\n";
  out += detail::pad_left(std::to_string(t.size()), 8) + " !NATOM\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    const std::string res = i < t.res_names.size() ? t.res_names[i] : "UNK";
    const std::string name = i < t.atom_names.size() ? t.atom_names[i] : t.elements[i];
    out += detail::pad_left(std::to_string(i + 1), 8) + " SYS  " + detail::pad_left(std::to_string(i + 1), 5) + " " +
           detail::pad_right(res, 4) + " " + detail::pad_right(name, 4) + " " + detail::pad_right(name, 4) + " " +
           detail::pad_left(detail::fixed(t.charges[i], 6), 10) + " " + detail::pad_left(detail::fixed(t.masses[i], 4), 13) +
           "           0\n";
  }
  out += "\n" + detail::pad_left(std::to_string(t.bonds.size()), 8) + " !NBOND: bonds\n";
  for (std::size_t k = 0; k < t.bonds.size(); ++k) {
    out += detail::pad_left(std::to_string(t.bonds[k].first + 1), 8) +
           detail::pad_left(std::to_string(t.bonds[k].second + 1), 8);
    if (k % 4 == 3 || k + 1 == t.bonds.size()) out += '\n';
  }
  out += "\n";
  return out;
}

}  // namespace namdkit
