//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molrange/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <unordered_set>

#include "molrange/chem/smiles.hpp"
#include "molrange/error.hpp"

namespace molrange::metrics {

namespace {

void require_nonempty(std::size_t n, const char *what) {
  if (n == 0)
    throw Error(ErrorKind::kEmptyInput, std::string(what) + " of an empty list");
}

}  // namespace

double validity(std::span<const std::string> smiles) {
  require_nonempty(smiles.size(), "validity");
  std::size_t ok = 0;
  for (const std::string &s: smiles)
    ok += chem::canonicalize(s).has_value() ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(smiles.size());
}

double uniqueness(std::span<const std::string> valid_smiles) {
  require_nonempty(valid_smiles.size(), "uniqueness");
  std::set<std::string> distinct;
  for (const std::string &s: valid_smiles)
    distinct.insert(chem::canonicalize(s).value_or(s));
  return static_cast<double>(distinct.size())
         / static_cast<double>(valid_smiles.size());
}

double novelty(std::span<const std::string> unique_canonical,
               std::span<const std::string> training_canonical) {
  require_nonempty(unique_canonical.size(), "novelty");
  const std::unordered_set<std::string> train(training_canonical.begin(),
                                              training_canonical.end());
  std::size_t novel = 0;
  for (const std::string &s: unique_canonical)
    novel += train.count(s) == 0 ? 1 : 0;
  return static_cast<double>(novel) / static_cast<double>(unique_canonical.size());
}

double internal_diversity(std::span<const Fingerprint> fps, bool exact,
                          std::uint64_t seed, std::size_t pair_cap) {
  const std::size_t n = fps.size();
  if (n < 2)
    throw Error(ErrorKind::kFewerThanTwo,
                "internal diversity needs two molecules, got " + std::to_string(n));
  const std::size_t pairs = n * (n - 1) / 2;
  double total = 0;
  if (exact || pairs <= pair_cap) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        total += tanimoto(fps[i], fps[j]);
    return total / static_cast<double>(pairs);
  }
  // Sample distinct pair indices; pair k maps to (i, j) row-major over i < j.
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pairs - 1);
  std::unordered_set<std::size_t> chosen;
  while (chosen.size() < pair_cap)
    chosen.insert(pick(rng));
  std::vector<std::size_t> order(chosen.begin(), chosen.end());
  std::sort(order.begin(), order.end());
  for (std::size_t k: order) {
    std::size_t i = 0, row = n - 1, rem = k;
    while (rem >= row) {
      rem -= row;
      ++i;
      --row;
    }
    total += tanimoto(fps[i], fps[i + 1 + rem]);
  }
  return total / static_cast<double>(pair_cap);
}

double property_compliance(std::span<const double> scores, const RangeSpec &spec) {
  require_nonempty(scores.size(), "property compliance");
  std::size_t inside = 0;
  for (double y: scores)
    inside += is_compliant(y, spec) ? 1 : 0;
  return static_cast<double>(inside) / static_cast<double>(scores.size());
}

GenerationReport build_report(std::span<const std::string> smiles,
                              std::span<const double> scores,
                              std::span<const std::string> training_canonical,
                              const RangeSpec &spec, std::uint64_t seed) {
  GenerationReport r;
  r.n_generated = smiles.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.validity = r.uniqueness = r.novelty = r.mean_pairwise_tanimoto = nan;
  r.property_compliance = nan;
  if (smiles.empty())
    return r;
  std::vector<std::string> valid;
  for (const std::string &s: smiles)
    if (auto c = chem::canonicalize(s))
      valid.push_back(*c);
  r.n_valid = valid.size();
  r.validity = static_cast<double>(valid.size()) / static_cast<double>(smiles.size());
  if (!scores.empty())
    r.property_compliance = property_compliance(scores, spec);
  if (valid.empty())
    return r;
  std::vector<std::string> unique;
  std::set<std::string> seen;
  for (const std::string &s: valid)
    if (seen.insert(s).second)
      unique.push_back(s);
  r.n_unique = unique.size();
  r.uniqueness = static_cast<double>(unique.size()) / static_cast<double>(valid.size());
  r.novelty = novelty(unique, training_canonical);
  if (unique.size() >= 2) {
    std::vector<Fingerprint> fps;
    for (const std::string &s: unique)
      fps.push_back(morgan_fingerprint(chem::parse_smiles(s).value()));
    r.mean_pairwise_tanimoto = internal_diversity(fps, false, seed);
  }
  return r;
}

void write_report(std::ostream &os, const GenerationReport &r) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << "n_generated = " << r.n_generated << '\n'
     << "n_valid = " << r.n_valid << '\n'
     << "n_unique = " << r.n_unique << '\n'
     << "validity = " << r.validity << '\n'
     << "uniqueness = " << r.uniqueness << '\n'
     << "novelty = " << r.novelty << '\n'
     << "mean_pairwise_tanimoto = " << r.mean_pairwise_tanimoto << '\n'
     << "property_compliance = " << r.property_compliance << '\n';
  for (const auto &[k, v]: r.provenance)
    os << k << " = " << v << '\n';
  os.precision(old);
}

void write_report_csv_header(std::ostream &os) {
  os << "n_generated,n_valid,n_unique,validity,uniqueness,novelty,"
        "mean_pairwise_tanimoto,property_compliance\n";
}

void write_report_csv_row(std::ostream &os, const GenerationReport &r) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << r.n_generated << ',' << r.n_valid << ',' << r.n_unique << ',' << r.validity
     << ',' << r.uniqueness << ',' << r.novelty << ',' << r.mean_pairwise_tanimoto
     << ',' << r.property_compliance << '\n';
  os.precision(old);
}

}  // namespace molrange::metrics
