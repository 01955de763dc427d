//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "molrange/chem/molecule.hpp"

namespace molrange {

inline constexpr int kDescriptorCount = 30;
inline constexpr int kDescriptorSchemaVersion = 1;

/// Column names in schema order.
std::span<const std::string_view> descriptor_names();

/// Count-type columns hold exact non-negative integers.
bool is_count_descriptor(int column);

struct DescriptorSet {
  std::array<double, kDescriptorCount> values {};
  int schema_version = kDescriptorSchemaVersion;

  double operator[](int i) const { return values[i]; }
};

struct DescriptorStats {
  std::array<double, kDescriptorCount> min {};
  std::array<double, kDescriptorCount> max {};
  std::array<double, kDescriptorCount> mean {};
  std::array<double, kDescriptorCount> stddev {};
  int schema_version = kDescriptorSchemaVersion;
};

/// Throws kEmptyMolecule when the graph has no heavy atoms.
DescriptorSet compute_descriptors(const chem::MolecularGraph &mol);

/// Exact per-column min/max/mean/population std. Throws kEmptyCorpus.
DescriptorStats fit_stats(std::span<const DescriptorSet> corpus);

/// Greedy scan in schema order: a column is dropped when its |Pearson r|
/// with any already retained column is strictly above `threshold`.
std::vector<int> redundancy_filter(std::span<const DescriptorSet> corpus,
                                   double threshold);

/// All-pairs shortest path lengths over heavy atoms (-1 when disconnected),
/// indexed by heavy-atom order.
std::vector<std::vector<int>> heavy_distance_matrix(const chem::MolecularGraph &mol);

}  // namespace molrange
