#include "namdkit/elements.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <utility>

namespace namdkit {
namespace {

struct ElementWeight {
  std::string_view symbol;
  double weight;
};

// IUPAC 2021 standard atomic weights; conventional values where the
// standard weight is an interval.
constexpr std::array kWeights{
    ElementWeight{"H", 1.008},    ElementWeight{"He", 4.0026},  ElementWeight{"Li", 6.94},
    ElementWeight{"Be", 9.0122},  ElementWeight{"B", 10.81},    ElementWeight{"C", 12.011},
    ElementWeight{"N", 14.007},   ElementWeight{"O", 15.999},   ElementWeight{"F", 18.998},
    ElementWeight{"Ne", 20.180},  ElementWeight{"Na", 22.990},  ElementWeight{"Mg", 24.305},
    ElementWeight{"Al", 26.982},  ElementWeight{"Si", 28.085},  ElementWeight{"P", 30.974},
    ElementWeight{"S", 32.06},    ElementWeight{"Cl", 35.45},   ElementWeight{"Ar", 39.95},
    ElementWeight{"K", 39.098},   ElementWeight{"Ca", 40.078},  ElementWeight{"Mn", 54.938},
    ElementWeight{"Fe", 55.845},  ElementWeight{"Co", 58.933},  ElementWeight{"Ni", 58.693},
    ElementWeight{"Cu", 63.546},  ElementWeight{"Zn", 65.38},   ElementWeight{"Se", 78.971},
    ElementWeight{"Br", 79.904},  ElementWeight{"Rb", 85.468},  ElementWeight{"Sr", 87.62},
    ElementWeight{"Cd", 112.41},  ElementWeight{"I", 126.90},   ElementWeight{"Cs", 132.91},
    ElementWeight{"Ba", 137.33},  ElementWeight{"Pt", 195.08},  ElementWeight{"Au", 196.97},
    ElementWeight{"Hg", 200.59},  ElementWeight{"Pb", 207.2},
};

}  // namespace

std::optional<double> standard_atomic_weight(std::string_view symbol) {
  for (const auto& e : kWeights)
    if (e.symbol == symbol) return e.weight;
  return std::nullopt;
}

double unknown_element_mass() { return 12.011; }

std::string normalize_element(std::string_view raw) {
  std::string s;
  for (char c : raw)
    if (std::isalpha(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty() || s.size() > 2) return std::string(kUnknownElement);
  s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  if (s.size() == 2) s[1] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[1])));
  if (!standard_atomic_weight(s)) return std::string(kUnknownElement);
  return s;
}

std::string element_from_mass(double mass) {
  std::string_view best = kUnknownElement;
  double best_diff = 1.0;
  for (const auto& e : kWeights) {
    const double diff = std::abs(e.weight - mass);
    if (diff < best_diff) {
      best_diff = diff;
      best = e.symbol;
    }
  }
  return std::string(best);
}

bool is_hbond_element(std::string_view symbol) {
  return symbol == "N" || symbol == "O" || symbol == "S";
}

}  // namespace namdkit
