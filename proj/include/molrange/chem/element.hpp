//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace molrange::chem {

struct Element {
  int atomic_number;
  std::string_view symbol;
  double mass;  // standard atomic weight, g/mol
};

/// Lookup by exact (case-sensitive) symbol, e.g. "Cl". Returns nullptr for
/// anything that is not an element symbol.
const Element *find_element(std::string_view symbol);

/// Lookup by atomic number in [1, 118].
const Element *element_by_number(int atomic_number);

/// Members of the SMILES organic subset that may be written without brackets.
bool is_organic_subset(int atomic_number);

/// Elements that may appear in lowercase (aromatic) form.
bool can_be_aromatic(int atomic_number);

/// Allowed neutral valences in ascending order. Empty when the element has no
/// entry in the valence table (such atoms are not valence-checked).
std::span<const int> default_valences(int atomic_number);

/// Valences allowed after isoelectronic charge adjustment.
std::optional<int> charge_adjusted_valence(int atomic_number, int base_valence,
                                           int formal_charge);

inline constexpr double kHydrogenMass = 1.008;

}  // namespace molrange::chem
