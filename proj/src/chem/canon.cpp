//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molrange/chem/canon.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>
#include <utility>

namespace molrange::chem {
namespace {

// Assigns dense ranks to atoms by sorting their keys. Returns the number of
// distinct classes.
template <class Key>
int rank_by_keys(const std::vector<Key> &keys, std::vector<int> &ranks) {
  const int n = static_cast<int>(keys.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return keys[a] < keys[b]; });
  ranks.assign(n, 0);
  int cls = 0;
  for (int i = 0; i < n; ++i) {
    if (i > 0 && keys[order[i - 1]] < keys[order[i]])
      ++cls;
    ranks[order[i]] = cls;
  }
  return n == 0 ? 0 : cls + 1;
}

using InitialKey = std::tuple<int, int, int, int, bool, int>;
using RefineKey = std::pair<int, std::vector<std::pair<int, int>>>;

std::vector<int> initial_ranks(const MolecularGraph &mol, int &classes) {
  std::vector<InitialKey> keys;
  keys.reserve(mol.num_atoms());
  for (int i = 0; i < mol.num_atoms(); ++i) {
    const Atom &a = mol.atom(i);
    keys.emplace_back(a.atomic_number, a.isotope.value_or(0), a.formal_charge,
                      mol.degree(i), a.aromatic, a.total_h());
  }
  std::vector<int> ranks;
  classes = rank_by_keys(keys, ranks);
  return ranks;
}

// Refines until the partition is stable.
int refine(const MolecularGraph &mol, std::vector<int> &ranks, int classes) {
  const int n = mol.num_atoms();
  std::vector<RefineKey> keys(n);
  while (true) {
    for (int i = 0; i < n; ++i) {
      keys[i].first = ranks[i];
      auto &nbrs = keys[i].second;
      nbrs.clear();
      for (const Neighbor &nb: mol.neighbors(i))
        nbrs.emplace_back(static_cast<int>(mol.bond(nb.bond).order),
                          ranks[nb.atom]);
      std::sort(nbrs.begin(), nbrs.end());
    }
    std::vector<int> next;
    int next_classes = rank_by_keys(keys, next);
    ranks = std::move(next);
    if (next_classes == classes)
      return classes;
    classes = next_classes;
  }
}

}  // namespace

std::vector<int> refine_classes(const MolecularGraph &mol) {
  int classes = 0;
  std::vector<int> ranks = initial_ranks(mol, classes);
  refine(mol, ranks, classes);
  return ranks;
}

std::vector<int> canonical_ranks(const MolecularGraph &mol) {
  const int n = mol.num_atoms();
  int classes = 0;
  std::vector<int> ranks = initial_ranks(mol, classes);
  classes = refine(mol, ranks, classes);

  while (classes < n) {
    std::vector<int> counts(classes, 0);
    for (int r: ranks)
      ++counts[r];
    int tied = 0;
    while (counts[tied] < 2)
      ++tied;

    int chosen = -1;
    for (int i = 0; i < n; ++i) {
      if (ranks[i] == tied) {
        chosen = i;
        break;
      }
    }

    std::vector<std::pair<int, int>> keys(n);
    for (int i = 0; i < n; ++i)
      keys[i] = { ranks[i], (ranks[i] == tied && i != chosen) ? 1 : 0 };
    classes = rank_by_keys(keys, ranks);
    classes = refine(mol, ranks, classes);
  }
  return ranks;
}

}  // namespace molrange::chem
