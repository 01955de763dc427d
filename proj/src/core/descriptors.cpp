//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molrange/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

#include "molrange/chem/canon.hpp"
#include "molrange/chem/element.hpp"
#include "molrange/chem/rings.hpp"
#include "molrange/error.hpp"

namespace molrange {

using chem::BondOrder;
using chem::MolecularGraph;

namespace {

constexpr std::array<std::string_view, kDescriptorCount> kNames {
  "mol_weight",     "heavy_atoms",     "bonds",           "rings",
  "aromatic_atoms", "aromatic_rings",  "heteroatoms",     "n_count",
  "o_count",        "s_count",         "halogens",        "hbond_donors",
  "hbond_acceptors", "rotatable_bonds", "net_charge",     "positive_atoms",
  "negative_atoms", "fraction_csp3",   "max_ring_size",   "min_ring_size",
  "diameter",       "wiener_index",    "zagreb1",         "zagreb2",
  "randic_index",   "avg_degree",      "ipc_entropy",     "ring_atoms",
  "hydrogens",      "double_bonds",
};

enum Column {
  kMolWeight,
  kHeavyAtoms,
  kBonds,
  kRings,
  kAromaticAtoms,
  kAromaticRings,
  kHeteroatoms,
  kNitrogen,
  kOxygen,
  kSulfur,
  kHalogens,
  kDonors,
  kAcceptors,
  kRotatable,
  kNetCharge,
  kPositive,
  kNegative,
  kFractionCsp3,
  kMaxRing,
  kMinRing,
  kDiameter,
  kWiener,
  kZagreb1,
  kZagreb2,
  kRandic,
  kAvgDegree,
  kIpc,
  kRingAtoms,
  kHydrogens,
  kDoubleBonds,
};

bool is_heavy(const MolecularGraph &mol, int atom) {
  return mol.atom(atom).atomic_number != 1;
}

}  // namespace

std::span<const std::string_view> descriptor_names() {
  return kNames;
}

bool is_count_descriptor(int column) {
  switch (column) {
  case kMolWeight:
  case kNetCharge:
  case kFractionCsp3:
  case kRandic:
  case kAvgDegree:
  case kIpc:
    return false;
  default:
    return column >= 0 && column < kDescriptorCount;
  }
}

std::vector<std::vector<int>> heavy_distance_matrix(const MolecularGraph &mol) {
  std::vector<int> heavy_index(mol.num_atoms(), -1);
  std::vector<int> heavy;
  for (int i = 0; i < mol.num_atoms(); ++i) {
    if (is_heavy(mol, i)) {
      heavy_index[i] = static_cast<int>(heavy.size());
      heavy.push_back(i);
    }
  }
  const int n = static_cast<int>(heavy.size());
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
  for (int s = 0; s < n; ++s) {
    std::queue<int> q;
    dist[s][s] = 0;
    q.push(heavy[s]);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (const chem::Neighbor &nb: mol.neighbors(u)) {
        int v = heavy_index[nb.atom];
        if (v < 0 || dist[s][v] >= 0)
          continue;
        dist[s][v] = dist[s][heavy_index[u]] + 1;
        q.push(nb.atom);
      }
    }
  }
  return dist;
}

DescriptorSet compute_descriptors(const MolecularGraph &mol) {
  DescriptorSet out;
  auto &v = out.values;

  std::vector<int> heavy_degree(mol.num_atoms(), 0);
  std::vector<int> hydrogens(mol.num_atoms(), 0);
  int heavy_atoms = 0;
  for (int i = 0; i < mol.num_atoms(); ++i) {
    hydrogens[i] = mol.atom(i).total_h();
    for (const chem::Neighbor &nb: mol.neighbors(i)) {
      if (is_heavy(mol, nb.atom))
        ++heavy_degree[i];
      else
        ++hydrogens[i];
    }
    if (is_heavy(mol, i))
      ++heavy_atoms;
  }
  if (heavy_atoms == 0)
    throw Error(ErrorKind::kEmptyMolecule, "no heavy atoms");

  const chem::RingInfo rings = chem::ring_perception(mol);

  double weight = 0;
  int carbons = 0, sp3_carbons = 0, total_h = 0;
  for (int i = 0; i < mol.num_atoms(); ++i) {
    const chem::Atom &a = mol.atom(i);
    const double mass = a.isotope ? static_cast<double>(*a.isotope)
                                  : chem::element_by_number(a.atomic_number)->mass;
    weight += mass + a.total_h() * chem::kHydrogenMass;
    total_h += a.total_h() + (is_heavy(mol, i) ? 0 : 1);

    v[kNetCharge] += a.formal_charge;
    if (a.formal_charge > 0)
      v[kPositive] += 1;
    if (a.formal_charge < 0)
      v[kNegative] += 1;

    if (!is_heavy(mol, i))
      continue;
    if (a.aromatic)
      v[kAromaticAtoms] += 1;
    switch (a.atomic_number) {
    case 6: {
      ++carbons;
      bool saturated = !a.aromatic;
      for (const chem::Neighbor &nb: mol.neighbors(i))
        saturated = saturated && mol.bond(nb.bond).order == BondOrder::kSingle;
      if (saturated)
        ++sp3_carbons;
      break;
    }
    case 7:
      v[kNitrogen] += 1;
      break;
    case 8:
      v[kOxygen] += 1;
      break;
    case 16:
      v[kSulfur] += 1;
      break;
    case 9:
    case 17:
    case 35:
    case 53:
      v[kHalogens] += 1;
      break;
    default:
      break;
    }
    if (a.atomic_number != 6)
      v[kHeteroatoms] += 1;
    if ((a.atomic_number == 7 || a.atomic_number == 8) && hydrogens[i] > 0)
      v[kDonors] += 1;
    if (rings.atom_in_ring[i])
      v[kRingAtoms] += 1;
    v[kZagreb1] += heavy_degree[i] * heavy_degree[i];
  }
  v[kMolWeight] = weight;
  v[kHeavyAtoms] = heavy_atoms;
  v[kAcceptors] = v[kNitrogen] + v[kOxygen];
  v[kFractionCsp3] = carbons > 0 ? static_cast<double>(sp3_carbons) / carbons : 0.0;
  v[kHydrogens] = total_h;

  int heavy_bonds = 0, degree_sum = 0;
  for (int b = 0; b < mol.num_bonds(); ++b) {
    const chem::Bond &bond = mol.bond(b);
    if (!is_heavy(mol, bond.begin) || !is_heavy(mol, bond.end))
      continue;
    ++heavy_bonds;
    const int du = heavy_degree[bond.begin], dv = heavy_degree[bond.end];
    degree_sum += du + dv;
    v[kZagreb2] += du * dv;
    v[kRandic] += 1.0 / std::sqrt(static_cast<double>(du * dv));
    if (bond.order == BondOrder::kDouble)
      v[kDoubleBonds] += 1;
    if (bond.order == BondOrder::kSingle && !rings.bond_in_ring[b] && du > 1
        && dv > 1)
      v[kRotatable] += 1;
  }
  v[kBonds] = heavy_bonds;
  v[kAvgDegree] = static_cast<double>(degree_sum) / heavy_atoms;

  v[kRings] = static_cast<double>(rings.rings.size());
  if (!rings.rings.empty()) {
    int lo = rings.rings.front().size(), hi = lo;
    for (const chem::Ring &r: rings.rings) {
      lo = std::min(lo, r.size());
      hi = std::max(hi, r.size());
      bool aromatic = std::all_of(r.atoms.begin(), r.atoms.end(),
                                  [&](int a) { return mol.atom(a).aromatic; });
      if (aromatic)
        v[kAromaticRings] += 1;
    }
    v[kMinRing] = lo;
    v[kMaxRing] = hi;
  }

  // Per-component diameters are summed, as are within-component Wiener
  // contributions.
  const auto dist = heavy_distance_matrix(mol);
  const int n = static_cast<int>(dist.size());
  std::vector<int> ecc(n, 0);
  double wiener = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (dist[i][j] < 0)
        continue;
      ecc[i] = std::max(ecc[i], dist[i][j]);
      if (j > i)
        wiener += dist[i][j];
    }
  }
  {
    std::vector<int> labels = mol.component_labels();
    std::map<int, int> diameter;
    int k = 0;
    for (int i = 0; i < mol.num_atoms(); ++i) {
      if (!is_heavy(mol, i))
        continue;
      int &d = diameter[labels[i]];
      d = std::max(d, ecc[k++]);
    }
    for (const auto &[label, d]: diameter)
      v[kDiameter] += d;
  }
  v[kWiener] = wiener;

  std::vector<int> classes = chem::refine_classes(mol);
  std::map<int, int> class_sizes;
  for (int i = 0; i < mol.num_atoms(); ++i) {
    if (is_heavy(mol, i))
      ++class_sizes[classes[i]];
  }
  double entropy = 0;
  for (const auto &[cls, count]: class_sizes) {
    const double p = static_cast<double>(count) / heavy_atoms;
    entropy -= p * std::log2(p);
  }
  v[kIpc] = entropy * heavy_atoms;

  return out;
}

DescriptorStats fit_stats(std::span<const DescriptorSet> corpus) {
  if (corpus.empty())
    throw Error(ErrorKind::kEmptyCorpus, "cannot fit descriptor statistics");
  DescriptorStats stats;
  stats.min = corpus.front().values;
  stats.max = corpus.front().values;
  for (const DescriptorSet &d: corpus) {
    if (d.schema_version != kDescriptorSchemaVersion)
      throw Error(ErrorKind::kStatsMismatch, "descriptor schema version");
    for (int c = 0; c < kDescriptorCount; ++c) {
      stats.min[c] = std::min(stats.min[c], d.values[c]);
      stats.max[c] = std::max(stats.max[c], d.values[c]);
      stats.mean[c] += d.values[c];
    }
  }
  const double n = static_cast<double>(corpus.size());
  for (int c = 0; c < kDescriptorCount; ++c)
    stats.mean[c] /= n;
  for (const DescriptorSet &d: corpus) {
    for (int c = 0; c < kDescriptorCount; ++c) {
      const double diff = d.values[c] - stats.mean[c];
      stats.stddev[c] += diff * diff;
    }
  }
  for (int c = 0; c < kDescriptorCount; ++c)
    stats.stddev[c] = std::sqrt(stats.stddev[c] / n);
  return stats;
}

namespace {

double abs_pearson(std::span<const DescriptorSet> corpus, int a, int b) {
  const double n = static_cast<double>(corpus.size());
  double ma = 0, mb = 0;
  bool identical = true;
  for (const DescriptorSet &d: corpus) {
    ma += d.values[a];
    mb += d.values[b];
    identical = identical && d.values[a] == d.values[b];
  }
  if (identical)
    return 1.0;
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (const DescriptorSet &d: corpus) {
    const double da = d.values[a] - ma, db = d.values[b] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0 || sbb == 0)
    return 0.0;
  return std::abs(sab / std::sqrt(saa * sbb));
}

}  // namespace

std::vector<int> redundancy_filter(std::span<const DescriptorSet> corpus,
                                   double threshold) {
  if (corpus.size() < 2)
    throw Error(ErrorKind::kEmptyCorpus, "redundancy filter needs >= 2 rows");
  std::vector<int> kept;
  for (int c = 0; c < kDescriptorCount; ++c) {
    bool redundant = std::any_of(kept.begin(), kept.end(), [&](int k) {
      return abs_pearson(corpus, c, k) > threshold;
    });
    if (!redundant)
      kept.push_back(c);
  }
  return kept;
}

}  // namespace molrange
