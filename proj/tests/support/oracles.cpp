//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "support/oracles.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>

namespace molrange::testing {
namespace {

using chem::MolecularGraph;

// Identifier of the radius-r environment at `atom`, recomputed from scratch
// at every level.
std::uint64_t oracle_identifier(const MolecularGraph &m, int atom, int r) {
  if (r == 0)
    return atom_invariant_hash(m, atom);
  std::vector<std::pair<int, std::uint64_t>> nbrs;
  for (const chem::Neighbor &nb: m.neighbors(atom))
    nbrs.emplace_back(static_cast<int>(m.bond(nb.bond).order),
                      oracle_identifier(m, nb.atom, r - 1));
  return grow_identifier(r, oracle_identifier(m, atom, r - 1), nbrs);
}

std::set<int> ball(const MolecularGraph &m, int center, int r) {
  std::vector<int> dist(m.num_atoms(), -1);
  std::queue<int> q;
  dist[center] = 0;
  q.push(center);
  std::set<int> out;
  while (!q.empty()) {
    const int a = q.front();
    q.pop();
    out.insert(a);
    if (dist[a] == r)
      continue;
    for (const chem::Neighbor &nb: m.neighbors(a))
      if (dist[nb.atom] < 0) {
        dist[nb.atom] = dist[a] + 1;
        q.push(nb.atom);
      }
  }
  return out;
}

}  // namespace

Fingerprint oracle_fingerprint(const MolecularGraph &m, int radius, int n_bits) {
  Fingerprint fp(n_bits, radius);
  std::set<std::set<int>> covered;
  for (int r = 0; r <= radius; ++r) {
    std::map<std::set<int>, std::uint64_t> fresh;
    for (int a = 0; a < m.num_atoms(); ++a) {
      const std::set<int> atoms = ball(m, a, r);
      if (r > 0 && covered.count(atoms))
        continue;
      const std::uint64_t id = oracle_identifier(m, a, r);
      if (r == 0) {
        fp.set(static_cast<int>(id % n_bits));
        continue;
      }
      auto it = fresh.find(atoms);
      if (it == fresh.end())
        fresh.emplace(atoms, id);
      else
        it->second = std::min(it->second, id);
    }
    for (int a = 0; a < m.num_atoms(); ++a)
      covered.insert(ball(m, a, r));
    for (const auto &[atoms, id]: fresh)
      fp.set(static_cast<int>(id % n_bits));
  }
  return fp;
}

std::pair<double, double> bfs_distance_oracle(const MolecularGraph &m) {
  const int n = m.num_atoms();
  double wiener = 0;
  std::vector<int> component(n, -1);
  std::vector<int> diameter;
  for (int s = 0; s < n; ++s) {
    if (m.atom(s).atomic_number == 1)
      continue;
    std::vector<int> dist(n, -1);
    std::queue<int> q;
    dist[s] = 0;
    q.push(s);
    int far = 0;
    while (!q.empty()) {
      const int a = q.front();
      q.pop();
      far = std::max(far, dist[a]);
      if (a > s)
        wiener += dist[a];
      for (const chem::Neighbor &nb: m.neighbors(a))
        if (dist[nb.atom] < 0 && m.atom(nb.atom).atomic_number != 1) {
          dist[nb.atom] = dist[a] + 1;
          q.push(nb.atom);
        }
    }
    if (component[s] < 0) {
      for (int a = 0; a < n; ++a)
        if (dist[a] >= 0)
          component[a] = static_cast<int>(diameter.size());
      diameter.push_back(0);
    }
    diameter[component[s]] = std::max(diameter[component[s]], far);
  }
  double total = 0;
  for (int d: diameter)
    total += d;
  return { wiener, total };
}

}  // namespace molrange::testing
