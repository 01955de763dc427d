//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molrange/pipeline/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "molrange/chem/smiles.hpp"
#include "molrange/nn/rng.hpp"

namespace molrange::pipeline {

namespace {

std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && ws(static_cast<unsigned char>(s.back())))
    s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && ws(static_cast<unsigned char>(s[i])))
    ++i;
  return s.substr(i);
}

}  // namespace

LoadedMolecules load_molecules(std::istream &is, bool labeled,
                               const FeatureConfig &cfg) {
  LoadedMolecules out;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#')
      continue;
    std::string smiles = text;
    int label = -1;
    if (labeled) {
      if (!header_seen) {
        header_seen = true;
        if (text.rfind("smiles", 0) == 0)
          continue;
      }
      const auto comma = text.find(',');
      if (comma == std::string::npos) {
        ++out.total;
        out.skipped.push_back({ lineno, text, "missing label column" });
        continue;
      }
      smiles = trim(text.substr(0, comma));
      const std::string lab = trim(text.substr(comma + 1));
      if (lab != "0" && lab != "1") {
        ++out.total;
        out.skipped.push_back({ lineno, text, "label must be 0 or 1" });
        continue;
      }
      label = lab == "1" ? 1 : 0;
    } else {
      smiles = smiles.substr(0, smiles.find_first_of(" \t"));
    }
    ++out.total;
    chem::ParseResult parsed = chem::parse_smiles(smiles);
    if (!parsed.ok()) {
      const chem::ParseDiagnostic &d = parsed.error();
      out.skipped.push_back({ lineno, text,
                              std::string(chem::parse_error_name(d.kind)) + " at "
                                  + std::to_string(d.position) + ": " + d.message });
      continue;
    }
    if (!chem::validate_valence(parsed.value())) {
      out.skipped.push_back({ lineno, text, "ValenceViolation" });
      continue;
    }
    Molecule m;
    m.line = lineno;
    m.canonical = chem::canonical_smiles(parsed.value());
    m.label = label;
    if (static_cast<int>(split_smiles_tokens(m.canonical).size()) + 2 > cfg.tgt_len) {
      out.skipped.push_back({ lineno, text, "TooLong for target length" });
      continue;
    }
    m.graph = std::move(parsed.value());
    out.molecules.push_back(std::move(m));
  }
  if (out.molecules.empty())
    throw Error(ErrorKind::kAllLinesInvalid,
                "no valid molecules among " + std::to_string(out.total) + " records");
  return out;
}

LoadedMolecules load_molecules(const std::filesystem::path &path, bool labeled,
                               const FeatureConfig &cfg) {
  std::ifstream is(path);
  if (!is)
    throw Error(ErrorKind::kFileNotFound, path.string());
  return load_molecules(is, labeled, cfg);
}

Split split_indices(std::size_t n, double ratio, std::uint64_t seed,
                    const std::vector<int> &labels) {
  if (!(ratio > 0.0 && ratio <= 1.0))
    throw Error(ErrorKind::kConfigInvalid, "split ratio must lie in (0, 1]");
  nn::Rng rng = nn::derive_rng(seed, 0x73706c6974);
  Split split;
  auto take = [&](std::vector<std::size_t> idx) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(
        std::llround(ratio * static_cast<double>(idx.size())));
    split.train.insert(split.train.end(), idx.begin(), idx.begin() + n_train);
    split.test.insert(split.test.end(), idx.begin() + n_train, idx.end());
  };
  const bool stratify = !labels.empty();
  if (stratify) {
    std::vector<std::size_t> neg, pos;
    for (std::size_t i = 0; i < n; ++i)
      (labels.at(i) == 1 ? pos : neg).push_back(i);
    take(std::move(neg));
    take(std::move(pos));
  } else {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i)
      all[i] = i;
    take(std::move(all));
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<DescriptorSet> descriptors_of(const std::vector<Molecule> &mols) {
  std::vector<DescriptorSet> out;
  out.reserve(mols.size());
  for (const Molecule &m: mols)
    out.push_back(compute_descriptors(m.graph));
  return out;
}

Vocabulary vocabulary_of(const std::vector<Molecule> &mols) {
  std::vector<std::string> smiles;
  for (const Molecule &m: mols)
    smiles.push_back(m.canonical);
  return build_target_vocabulary(smiles);
}

TokenDataset build_token_dataset(const std::vector<Molecule> &mols,
                                 const DescriptorStats &stats,
                                 const Vocabulary &vocab, const FeatureConfig &cfg) {
  TokenDataset ds;
  ds.source_length = cfg.src_len;
  ds.target_length = cfg.tgt_len;
  for (const Molecule &m: mols) {
    const Fingerprint fp = morgan_fingerprint(m.graph, cfg.radius, cfg.n_bits);
    ds.sources.push_back(
        encode_source(fp, compute_descriptors(m.graph), stats, cfg.src_len));
    ds.targets.push_back(tokenize_smiles(m.canonical, vocab, cfg.tgt_len));
  }
  return ds;
}

void save_stats(std::ostream &os, const DescriptorStats &stats) {
  os << "molrange-stats " << stats.schema_version << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  const auto names = descriptor_names();
  for (int c = 0; c < kDescriptorCount; ++c)
    os << names[c] << ' ' << stats.min[c] << ' ' << stats.max[c] << ' '
       << stats.mean[c] << ' ' << stats.stddev[c] << '\n';
}

DescriptorStats load_stats(std::istream &is) {
  std::string magic;
  DescriptorStats s;
  if (!(is >> magic >> s.schema_version) || magic != "molrange-stats")
    throw Error(ErrorKind::kFormat, "not a descriptor statistics file");
  if (s.schema_version != kDescriptorSchemaVersion)
    throw Error(ErrorKind::kStatsMismatch,
                "statistics schema " + std::to_string(s.schema_version));
  const auto names = descriptor_names();
  for (int c = 0; c < kDescriptorCount; ++c) {
    std::string name;
    if (!(is >> name >> s.min[c] >> s.max[c] >> s.mean[c] >> s.stddev[c]))
      throw Error(ErrorKind::kFormat, "truncated descriptor statistics");
    if (name != names[c])
      throw Error(ErrorKind::kStatsMismatch, "unexpected column " + name);
  }
  return s;
}

}  // namespace molrange::pipeline
