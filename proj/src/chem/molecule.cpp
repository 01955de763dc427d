//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molrange/chem/molecule.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <tuple>

#include "molrange/chem/element.hpp"
#include "molrange/error.hpp"

namespace molrange::chem {

std::string_view Atom::symbol() const {
  const Element *e = element_by_number(atomic_number);
  return e != nullptr ? e->symbol : std::string_view("?");
}

int MolecularGraph::add_atom(const Atom &atom) {
  atoms_.push_back(atom);
  adj_.emplace_back();
  return num_atoms() - 1;
}

int MolecularGraph::add_bond(int a, int b, BondOrder order) {
  if (a < 0 || b < 0 || a >= num_atoms() || b >= num_atoms())
    throw Error(ErrorKind::kInvalidArgument, "bond endpoint out of range");
  if (a == b)
    throw Error(ErrorKind::kInvalidArgument, "bond to self");
  if (find_bond(a, b))
    throw Error(ErrorKind::kInvalidArgument,
                "duplicate bond " + std::to_string(a) + "-" + std::to_string(b));
  if (order == BondOrder::kAromatic
      && !(atoms_[a].aromatic && atoms_[b].aromatic))
    throw Error(ErrorKind::kInvalidArgument,
                "aromatic bond between non-aromatic atoms");

  bonds_.push_back({ a, b, order });
  const int idx = num_bonds() - 1;
  adj_[a].push_back({ b, idx });
  adj_[b].push_back({ a, idx });
  return idx;
}

void MolecularGraph::set_implicit_h(int atom, int count) {
  atoms_[atom].implicit_h = count;
}

std::optional<int> MolecularGraph::find_bond(int a, int b) const {
  for (const Neighbor &n: adj_[a]) {
    if (n.atom == b)
      return n.bond;
  }
  return std::nullopt;
}

int MolecularGraph::bond_valence(int atom) const {
  int sum = 0;
  for (const Neighbor &n: adj_[atom])
    sum += valence_contribution(bonds_[n.bond].order);
  return sum;
}

bool MolecularGraph::has_aromatic_bond(int atom) const {
  return std::any_of(adj_[atom].begin(), adj_[atom].end(), [&](Neighbor n) {
    return bonds_[n.bond].order == BondOrder::kAromatic;
  });
}

std::vector<int> MolecularGraph::component_labels() const {
  std::vector<int> label(atoms_.size(), -1);
  std::vector<int> stack;
  int next = 0;
  for (int start = 0; start < num_atoms(); ++start) {
    if (label[start] >= 0)
      continue;
    label[start] = next;
    stack.push_back(start);
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (const Neighbor &n: adj_[u]) {
        if (label[n.atom] < 0) {
          label[n.atom] = next;
          stack.push_back(n.atom);
        }
      }
    }
    ++next;
  }
  return label;
}

int MolecularGraph::num_components() const {
  std::vector<int> labels = component_labels();
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

MolecularGraph permute_atoms(const MolecularGraph &mol,
                             std::span<const int> perm) {
  if (static_cast<int>(perm.size()) != mol.num_atoms())
    throw Error(ErrorKind::kInvalidArgument, "permutation size mismatch");

  std::vector<int> inverse(perm.size(), -1);
  for (int i = 0; i < mol.num_atoms(); ++i) {
    if (perm[i] < 0 || perm[i] >= mol.num_atoms() || inverse[perm[i]] >= 0)
      throw Error(ErrorKind::kInvalidArgument, "not a permutation");
    inverse[perm[i]] = i;
  }

  MolecularGraph out;
  for (int j = 0; j < mol.num_atoms(); ++j)
    out.add_atom(mol.atom(inverse[j]));

  std::vector<std::tuple<int, int, BondOrder>> bonds;
  bonds.reserve(mol.num_bonds());
  for (const Bond &b: mol.bonds()) {
    int u = perm[b.begin], v = perm[b.end];
    bonds.emplace_back(std::min(u, v), std::max(u, v), b.order);
  }
  std::sort(bonds.begin(), bonds.end());
  for (auto [u, v, order]: bonds)
    out.add_bond(u, v, order);
  return out;
}

std::optional<int> bare_implicit_h(const MolecularGraph &mol, int atom) {
  const Atom &a = mol.atom(atom);
  std::span<const int> valences = default_valences(a.atomic_number);
  if (valences.empty())
    return 0;

  const int bonded = mol.bond_valence(atom);
  if (a.aromatic) {
    // One valence slot goes to the aromatic pi system; heteroatoms donating a
    // lone pair (o, s) simply end up with zero hydrogens.
    return std::max(0, valences.front() - bonded - 1);
  }

  for (int v: valences) {
    if (v >= bonded)
      return v - bonded;
  }
  return std::nullopt;
}

bool atom_valence_ok(const MolecularGraph &mol, int atom) {
  const Atom &a = mol.atom(atom);
  std::span<const int> valences = default_valences(a.atomic_number);
  if (valences.empty())
    return true;

  const int total = mol.bond_valence(atom) + a.total_h();
  const bool pi = a.aromatic && mol.has_aromatic_bond(atom);
  for (int v: valences) {
    std::optional<int> allowed = charge_adjusted_valence(a.atomic_number, v,
                                                         a.formal_charge);
    if (!allowed)
      continue;
    if (total == *allowed || (pi && total + 1 == *allowed))
      return true;
  }
  return false;
}

bool validate_valence(const MolecularGraph &mol) {
  for (int i = 0; i < mol.num_atoms(); ++i) {
    if (!atom_valence_ok(mol, i))
      return false;
  }
  return true;
}

}  // namespace molrange::chem
