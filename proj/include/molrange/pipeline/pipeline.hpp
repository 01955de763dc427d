//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "molrange/metrics.hpp"
#include "molrange/pipeline/config.hpp"

namespace molrange::pipeline {

/// Artifact names inside the work directory.
namespace artifact {
inline constexpr const char *kManifest = "manifest.txt";
inline constexpr const char *kStats = "stats.txt";
inline constexpr const char *kVocab = "vocab.txt";
inline constexpr const char *kTrainTokens = "train.mrds";
inline constexpr const char *kTestTokens = "test.mrds";
inline constexpr const char *kEmbedder = "embedder.mrng";
inline constexpr const char *kEmbedderHistory = "embedder_history.csv";
inline constexpr const char *kEmbeddings = "embeddings.mrng";
inline constexpr const char *kClassifier = "classifier.mrng";
inline constexpr const char *kClassifierHistory = "classifier_history.csv";
inline constexpr const char *kClassifierMetrics = "classifier_metrics.csv";
inline constexpr const char *kGan = "gan.mrng";
inline constexpr const char *kGanHistory = "gan_history.csv";
inline constexpr const char *kGenerated = "generated.csv";
inline constexpr const char *kReport = "report.txt";
inline constexpr const char *kReportCsv = "report.csv";
inline constexpr const char *kDescriptors = "descriptors.csv";
}  // namespace artifact

struct StageOptions {
  bool force = false;  // overwrite existing outputs
  std::ostream *log = nullptr;
};

/// Ingests the corpus (manifest, statistics, vocabulary, token caches) and
/// trains the embedder.
void train_embedder_stage(const PipelineConfig &cfg, const StageOptions &opt);

/// Embeds the corpus and the labeled set with the trained encoder.
void embed_stage(const PipelineConfig &cfg, const StageOptions &opt);

/// Stratified split of the labeled embeddings, training and held-out metrics.
void train_classifier_stage(const PipelineConfig &cfg, const StageOptions &opt);

/// Range-loss WGAN on corpus embeddings with the frozen classifier as the
/// property head.
void train_gan_stage(const PipelineConfig &cfg, const StageOptions &opt);

/// Writes generate.count decoded molecules (smiles,score,valid,canonical_smiles).
void generate_stage(const PipelineConfig &cfg, const StageOptions &opt);

/// Builds the generation report from the generated CSV and writes it as
/// key-value text and as a CSV row, with every config value echoed.
metrics::GenerationReport evaluate_stage(const PipelineConfig &cfg,
                                         const StageOptions &opt);

/// Corpus descriptors as CSV: smiles then the 30 descriptor columns.
void export_descriptors_stage(const PipelineConfig &cfg, const StageOptions &opt);

/// Runs every stage in order.
metrics::GenerationReport run_all(const PipelineConfig &cfg, const StageOptions &opt);

}  // namespace molrange::pipeline
