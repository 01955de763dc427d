//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace molrange::chem {

enum class BondOrder : std::uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

/// Contribution of a bond to the bonded valence of each endpoint. Aromatic
/// bonds count as 1; the extra pi electron is accounted for per atom.
constexpr int valence_contribution(BondOrder order) {
  return order == BondOrder::kAromatic ? 1 : static_cast<int>(order);
}

struct Atom {
  int atomic_number = 6;
  int formal_charge = 0;
  bool aromatic = false;
  std::optional<int> explicit_h;  // bracket-specified H count
  std::optional<int> isotope;
  int implicit_h = 0;             // 0 whenever explicit_h is set

  int total_h() const { return explicit_h.value_or(0) + implicit_h; }
  std::string_view symbol() const;

  friend bool operator==(const Atom &, const Atom &) = default;
};

struct Bond {
  int begin;
  int end;
  BondOrder order;

  int other(int atom) const { return atom == begin ? end : begin; }
};

struct Neighbor {
  int atom;
  int bond;
};

/// Heavy-atom molecular graph. Hydrogens are stored as counts on atoms unless
/// written as explicit [H] atoms in the input.
class MolecularGraph {
public:
  int add_atom(const Atom &atom);

  /// Throws Error(kInvalidArgument) on self loops, out-of-range endpoints,
  /// duplicate bonds or aromatic bonds between non-aromatic atoms.
  int add_bond(int a, int b, BondOrder order);

  void set_implicit_h(int atom, int count);

  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }
  bool empty() const { return atoms_.empty(); }

  const Atom &atom(int i) const { return atoms_[i]; }
  const Bond &bond(int i) const { return bonds_[i]; }
  const std::vector<Atom> &atoms() const { return atoms_; }
  const std::vector<Bond> &bonds() const { return bonds_; }

  std::span<const Neighbor> neighbors(int atom) const { return adj_[atom]; }
  int degree(int atom) const { return static_cast<int>(adj_[atom].size()); }

  std::optional<int> find_bond(int a, int b) const;

  /// Sum of bond valence contributions at an atom (aromatic counted as 1).
  int bond_valence(int atom) const;
  bool has_aromatic_bond(int atom) const;

  /// Connected-component label per atom, labels dense from 0.
  std::vector<int> component_labels() const;
  int num_components() const;

private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adj_;
};

/// Returns a copy where original atom i becomes atom perm[i]. Bonds are
/// re-added ordered by their new endpoint indices, so neighbor order changes
/// too.
MolecularGraph permute_atoms(const MolecularGraph &mol,
                             std::span<const int> perm);

/// Implicit hydrogen count for an unbracketed organic-subset atom given its
/// current bonds, or nullopt when the bonds exceed every allowed valence.
std::optional<int> bare_implicit_h(const MolecularGraph &mol, int atom);

/// True iff every atom's bonded valence plus hydrogens fits an allowed
/// (charge-adjusted) valence of its element.
bool validate_valence(const MolecularGraph &mol);
bool atom_valence_ok(const MolecularGraph &mol, int atom);

}  // namespace molrange::chem
