//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "molrange/fingerprint.hpp"
#include "molrange/range_spec.hpp"

namespace molrange::metrics {

/// Fraction of strings that parse and pass valence validation. Throws
/// kEmptyInput.
double validity(std::span<const std::string> smiles);

/// Distinct canonical forms over the count of (already valid) inputs.
/// Inputs that fail to canonicalize count under their raw text.
double uniqueness(std::span<const std::string> valid_smiles);

/// Fraction of `unique_canonical` absent from `training_canonical`.
double novelty(std::span<const std::string> unique_canonical,
               std::span<const std::string> training_canonical);

inline constexpr std::size_t kDiversityPairCap = 10000;

/// Mean pairwise Tanimoto similarity (higher means more similar). Exact
/// over all unordered pairs when the pair count is within `pair_cap` or
/// `exact` is set; otherwise `pair_cap` distinct pairs are drawn with a
/// seeded generator. Throws kFewerThanTwo.
double internal_diversity(std::span<const Fingerprint> fps, bool exact = false,
                          std::uint64_t seed = 0,
                          std::size_t pair_cap = kDiversityPairCap);

/// Fraction strictly inside the range. Throws kEmptyInput.
double property_compliance(std::span<const double> scores, const RangeSpec &spec);

struct GenerationReport {
  std::size_t n_generated = 0;
  std::size_t n_valid = 0;
  std::size_t n_unique = 0;
  double validity = 0;
  double uniqueness = 0;
  double novelty = 0;
  double mean_pairwise_tanimoto = 0;  // NaN with fewer than two unique
  double property_compliance = 0;
  /// Extra key-value lines echoed after the metrics (e.g. config values).
  std::map<std::string, std::string> provenance;
};

/// Metric chain: validity over all strings, uniqueness over the valid ones,
/// novelty and diversity over the unique canonical set, compliance over all
/// scores.
GenerationReport build_report(std::span<const std::string> smiles,
                              std::span<const double> scores,
                              std::span<const std::string> training_canonical,
                              const RangeSpec &spec, std::uint64_t seed = 0);

/// "key = value" lines.
void write_report(std::ostream &os, const GenerationReport &r);
void write_report_csv_header(std::ostream &os);
void write_report_csv_row(std::ostream &os, const GenerationReport &r);

}  // namespace molrange::metrics
