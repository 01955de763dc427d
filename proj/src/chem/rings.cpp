//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molrange/chem/rings.hpp"

#include <algorithm>
#include <cstdint>
#include <queue>
#include <set>

namespace molrange::chem {
namespace {

using EdgeSet = std::vector<std::uint64_t>;

struct Candidate {
  EdgeSet edges;
  int length;
};

struct ShortestPathTree {
  std::vector<int> parent_bond;  // -1 at root / unreachable
  std::vector<int> parent_atom;
};

ShortestPathTree bfs_tree(const MolecularGraph &mol, int root) {
  ShortestPathTree t { std::vector<int>(mol.num_atoms(), -1),
                       std::vector<int>(mol.num_atoms(), -1) };
  std::vector<bool> seen(mol.num_atoms(), false);
  std::queue<int> q;
  seen[root] = true;
  q.push(root);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (const Neighbor &n: mol.neighbors(u)) {
      if (seen[n.atom])
        continue;
      seen[n.atom] = true;
      t.parent_atom[n.atom] = u;
      t.parent_bond[n.atom] = n.bond;
      q.push(n.atom);
    }
  }
  return t;
}

// Bonds on the tree path from `atom` up to the root.
std::vector<int> path_to_root(const ShortestPathTree &t, int atom) {
  std::vector<int> path;
  while (t.parent_bond[atom] >= 0) {
    path.push_back(t.parent_bond[atom]);
    atom = t.parent_atom[atom];
  }
  return path;
}

std::vector<int> path_atoms(const ShortestPathTree &t, int atom) {
  std::vector<int> atoms { atom };
  while (t.parent_atom[atom] >= 0) {
    atom = t.parent_atom[atom];
    atoms.push_back(atom);
  }
  return atoms;
}

void set_bit(EdgeSet &s, int i) {
  s[i / 64] |= std::uint64_t { 1 } << (i % 64);
}

bool test_bit(const EdgeSet &s, int i) {
  return (s[i / 64] >> (i % 64)) & 1U;
}

int lowest_bit(const EdgeSet &s) {
  for (std::size_t w = 0; w < s.size(); ++w) {
    if (s[w] != 0)
      return static_cast<int>(w * 64) + __builtin_ctzll(s[w]);
  }
  return -1;
}

// Orders the edges of a simple cycle into a closed walk.
Ring edges_to_ring(const MolecularGraph &mol, const EdgeSet &edges) {
  Ring ring;
  std::vector<int> bonds;
  for (int b = 0; b < mol.num_bonds(); ++b) {
    if (test_bit(edges, b))
      bonds.push_back(b);
  }
  const int start = mol.bond(bonds.front()).begin;
  int prev_bond = -1;
  int cur = start;
  do {
    ring.atoms.push_back(cur);
    int next_bond = -1;
    for (const Neighbor &n: mol.neighbors(cur)) {
      if (n.bond != prev_bond && test_bit(edges, n.bond)) {
        next_bond = n.bond;
        break;
      }
    }
    ring.bonds.push_back(next_bond);
    prev_bond = next_bond;
    cur = mol.bond(next_bond).other(cur);
  } while (cur != start);
  return ring;
}

}  // namespace

RingInfo ring_perception(const MolecularGraph &mol) {
  RingInfo info;
  info.atom_in_ring.assign(mol.num_atoms(), false);
  info.bond_in_ring.assign(mol.num_bonds(), false);

  const int target = mol.num_bonds() - mol.num_atoms() + mol.num_components();
  if (target <= 0)
    return info;

  const std::size_t words = (mol.num_bonds() + 63) / 64;
  std::set<EdgeSet> seen;
  std::vector<Candidate> candidates;

  for (int root = 0; root < mol.num_atoms(); ++root) {
    ShortestPathTree tree = bfs_tree(mol, root);
    for (int b = 0; b < mol.num_bonds(); ++b) {
      const Bond &bond = mol.bond(b);
      if (tree.parent_bond[bond.begin] == b || tree.parent_bond[bond.end] == b)
        continue;
      if (bond.begin != root && tree.parent_bond[bond.begin] < 0)
        continue;  // other component
      if (bond.end != root && tree.parent_bond[bond.end] < 0)
        continue;

      // Paths may only share the root.
      std::vector<int> pa = path_atoms(tree, bond.begin);
      std::vector<int> pb = path_atoms(tree, bond.end);
      std::sort(pa.begin(), pa.end());
      std::sort(pb.begin(), pb.end());
      std::vector<int> shared;
      std::set_intersection(pa.begin(), pa.end(), pb.begin(), pb.end(),
                            std::back_inserter(shared));
      if (shared.size() != 1 || shared.front() != root)
        continue;

      EdgeSet edges(words, 0);
      set_bit(edges, b);
      int length = 1;
      for (int e: path_to_root(tree, bond.begin)) {
        set_bit(edges, e);
        ++length;
      }
      for (int e: path_to_root(tree, bond.end)) {
        set_bit(edges, e);
        ++length;
      }
      if (seen.insert(edges).second)
        candidates.push_back({ std::move(edges), length });
    }
  }

  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate &a, const Candidate &b) {
                     return a.length < b.length;
                   });

  // Greedy independence test by Gaussian elimination over GF(2), keyed by
  // pivot bit.
  std::vector<EdgeSet> reduced;
  std::vector<int> pivots;
  for (const Candidate &c: candidates) {
    EdgeSet v = c.edges;
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < reduced.size(); ++i) {
        if (test_bit(v, pivots[i])) {
          for (std::size_t w = 0; w < words; ++w)
            v[w] ^= reduced[i][w];
          changed = true;
        }
      }
    }
    int pivot = lowest_bit(v);
    if (pivot < 0)
      continue;
    reduced.push_back(std::move(v));
    pivots.push_back(pivot);
    info.rings.push_back(edges_to_ring(mol, c.edges));
    if (static_cast<int>(info.rings.size()) == target)
      break;
  }

  for (const Ring &r: info.rings) {
    for (int a: r.atoms)
      info.atom_in_ring[a] = true;
    for (int b: r.bonds)
      info.bond_in_ring[b] = true;
  }
  return info;
}

}  // namespace molrange::chem
