//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "molrange/chem/molecule.hpp"
#include "molrange/descriptors.hpp"
#include "molrange/encoding.hpp"

namespace molrange::pipeline {

struct FeatureConfig {
  int radius = kDefaultFingerprintRadius;
  int n_bits = kDefaultFingerprintBits;
  int src_len = kDefaultSourceLength;
  int tgt_len = kDefaultTargetLength;
};

struct Molecule {
  std::size_t line = 0;  // 1-based line in the source file
  std::string canonical;
  chem::MolecularGraph graph;
  int label = -1;  // -1 when unlabeled
};

struct SkippedLine {
  std::size_t line = 0;
  std::string text;
  std::string reason;
};

struct LoadedMolecules {
  std::vector<Molecule> molecules;
  std::vector<SkippedLine> skipped;
  std::size_t total = 0;  // non-blank, non-comment records
};

/// Reads newline SMILES, or a `smiles,label` CSV when `labeled`. Lines that
/// fail to parse, violate valences, carry a bad label or exceed the target
/// length are skipped with a reason. Throws kFileNotFound and
/// kAllLinesInvalid.
LoadedMolecules load_molecules(const std::filesystem::path &path, bool labeled,
                               const FeatureConfig &cfg);
LoadedMolecules load_molecules(std::istream &is, bool labeled,
                               const FeatureConfig &cfg);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle split with round(ratio * n) training items. With labels
/// (all >= 0) each class is split separately, so class ratios agree within
/// one sample. Indices are returned in ascending order.
Split split_indices(std::size_t n, double ratio, std::uint64_t seed,
                    const std::vector<int> &labels = {});

std::vector<DescriptorSet> descriptors_of(const std::vector<Molecule> &mols);

/// Source and target token rows for each molecule.
TokenDataset build_token_dataset(const std::vector<Molecule> &mols,
                                 const DescriptorStats &stats,
                                 const Vocabulary &vocab, const FeatureConfig &cfg);

Vocabulary vocabulary_of(const std::vector<Molecule> &mols);

/// Text form: "molrange-stats <schema>" then one line per descriptor:
/// name min max mean stddev, using round-trip precision.
void save_stats(std::ostream &os, const DescriptorStats &stats);
DescriptorStats load_stats(std::istream &is);

}  // namespace molrange::pipeline
