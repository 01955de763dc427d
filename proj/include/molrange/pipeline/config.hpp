//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "molrange/models/classifier.hpp"
#include "molrange/models/embedder.hpp"
#include "molrange/models/range_gan.hpp"
#include "molrange/pipeline/dataset.hpp"
#include "molrange/range_spec.hpp"

namespace molrange::pipeline {

inline constexpr const char *kConfigEnvVar = "MOLRANGE_CONFIG";

struct PipelineConfig {
  std::string preset = "desk";
  std::uint64_t seed = 42;

  std::filesystem::path corpus = "data/sample_corpus.smi";
  std::filesystem::path labeled = "data/toy_odorants.csv";
  std::filesystem::path work_dir = "runs/desk";

  FeatureConfig features;
  double split_ratio = 0.8;

  models::EmbedderConfig embedder = models::EmbedderConfig::desk();
  std::size_t embedder_epochs = 300;
  std::size_t embedder_batch = 16;
  double embedder_stop_at = 0.95;

  models::ClassifierConfig classifier = models::ClassifierConfig::desk();
  std::size_t classifier_epochs = 60;
  std::size_t classifier_batch = 16;
  bool classifier_weighting = true;

  models::GanConfig gan = models::GanConfig::desk();
  RangeSpec range;
  bool strict_range = false;
  std::size_t validity_probe_every = 100;

  std::size_t generate_count = 100;

  /// Defaults for a named preset ("desk" or "paper"). Throws
  /// kConfigInvalid for other names.
  static PipelineConfig preset_defaults(const std::string &name);

  /// Sets one dotted key from text. Throws kConfigInvalid naming the key.
  void set(const std::string &key, const std::string &value);

  /// Every key with its current value, in documentation order.
  std::vector<std::pair<std::string, std::string>> entries() const;

  /// Ties dependent shapes (classifier and GAN input size follow the
  /// feature and embedder settings) and validates every module config.
  void finalize();
};

/// key = value lines; '#' starts a comment. Returns pairs in file order.
std::vector<std::pair<std::string, std::string>> parse_config_text(std::istream &is);

/// Resolution order: preset defaults (preset from `preset_override`, else
/// the file's `preset` key, else desk), then file values, then overrides.
PipelineConfig load_config(const std::filesystem::path *path,
                           const std::string &preset_override,
                           const std::vector<std::pair<std::string, std::string>> &overrides);

}  // namespace molrange::pipeline
