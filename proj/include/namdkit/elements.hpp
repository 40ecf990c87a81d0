#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace namdkit {

/// Sentinel for atoms whose element could not be determined.
inline constexpr std::string_view kUnknownElement = "X";

/// Standard atomic weight (IUPAC 2021, conventional/abridged value) in amu.
std::optional<double> standard_atomic_weight(std::string_view symbol);

/// Mass used for atoms whose element is unknown ("X"): carbon.
double unknown_element_mass();

/// Canonical symbol ("CL" -> "Cl", " c" -> "C"), or "X" if unrecognised.
std::string normalize_element(std::string_view raw);

/// Element whose standard weight is closest to `mass`, "X" if nothing is within 1 amu.
std::string element_from_mass(double mass);

bool is_hbond_element(std::string_view symbol);  // N, O or S

}  // namespace namdkit
