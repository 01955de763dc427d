//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molrange/pipeline/pipeline.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "molrange/chem/smiles.hpp"
#include "molrange/models/classifier.hpp"
#include "molrange/models/embedder.hpp"
#include "molrange/models/range_gan.hpp"

namespace molrange::pipeline {

namespace fs = std::filesystem;
using Real = float;
using nn::Tensor;

namespace {

class NullBuffer : public std::streambuf {
protected:
  int overflow(int c) override { return c; }
};

std::ostream &log_of(const StageOptions &opt) {
  static NullBuffer null_buffer;
  static std::ostream null_stream(&null_buffer);
  return opt.log ? *opt.log : null_stream;
}

fs::path in_work(const PipelineConfig &cfg, const char *name) {
  return cfg.work_dir / name;
}

void guard_outputs(const PipelineConfig &cfg, const StageOptions &opt,
                   std::initializer_list<const char *> names) {
  fs::create_directories(cfg.work_dir);
  if (opt.force)
    return;
  for (const char *n: names) {
    const fs::path p = in_work(cfg, n);
    if (fs::exists(p))
      throw Error(ErrorKind::kOutputExists,
                  p.string() + " exists; pass --force to overwrite");
  }
}

fs::path require(const PipelineConfig &cfg, const char *name, const char *stage) {
  const fs::path p = in_work(cfg, name);
  if (!fs::exists(p))
    throw Error(ErrorKind::kMissingCheckpoint,
                p.string() + " not found; run " + std::string(stage) + " first");
  return p;
}

std::ofstream open_out(const fs::path &p) {
  std::ofstream os(p);
  if (!os)
    throw Error(ErrorKind::kFormat, "cannot write " + p.string());
  os << std::setprecision(std::numeric_limits<float>::max_digits10);
  return os;
}

void log_skipped(std::ostream &log, const fs::path &path, const LoadedMolecules &lm) {
  for (const SkippedLine &s: lm.skipped)
    log << path.string() << ':' << s.line << ": skipped '" << s.text << "': "
        << s.reason << '\n';
}

Vocabulary load_vocab(const PipelineConfig &cfg) {
  return Vocabulary::load(require(cfg, artifact::kVocab, "train-embedder"));
}

DescriptorStats load_stats_file(const PipelineConfig &cfg) {
  std::ifstream is(require(cfg, artifact::kStats, "train-embedder"));
  return load_stats(is);
}

models::Embedder<Real> load_embedder(const PipelineConfig &cfg, const Vocabulary &vocab) {
  models::EmbedderConfig ec = cfg.embedder;
  ec.tgt_vocab = static_cast<std::size_t>(vocab.size());
  models::Embedder<Real> model(ec, cfg.seed);
  model.load(nn::Checkpoint::load(require(cfg, artifact::kEmbedder, "train-embedder")));
  return model;
}

models::Classifier<Real> load_classifier(const PipelineConfig &cfg) {
  models::Classifier<Real> model(cfg.classifier, cfg.seed);
  model.load(nn::Checkpoint::load(require(cfg, artifact::kClassifier, "train-classifier")));
  return model;
}

/// Unstacks [N, rows, cols] into N [rows, cols] tensors.
std::vector<Tensor<Real>> unstack(const nn::StoredTensor &s) {
  std::vector<Tensor<Real>> out;
  if (s.shape.size() != 3)
    return out;
  const std::size_t n = s.shape[0], per = s.shape[1] * s.shape[2];
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Real> v(per);
    for (std::size_t j = 0; j < per; ++j)
      v[j] = static_cast<Real>(s.values[i * per + j]);
    out.push_back(Tensor<Real>::from({ s.shape[1], s.shape[2] }, std::move(v)));
  }
  return out;
}

std::vector<std::string> corpus_canonical(const PipelineConfig &cfg) {
  std::vector<std::string> out;
  for (const Molecule &m: load_molecules(cfg.corpus, false, cfg.features).molecules)
    out.push_back(m.canonical);
  return out;
}

}  // namespace

void train_embedder_stage(const PipelineConfig &cfg, const StageOptions &opt) {
  using namespace artifact;
  guard_outputs(cfg, opt, { kManifest, kStats, kVocab, kTrainTokens, kTestTokens,
                            kEmbedder, kEmbedderHistory });
  std::ostream &log = log_of(opt);
  const LoadedMolecules lm = load_molecules(cfg.corpus, false, cfg.features);
  log_skipped(log, cfg.corpus, lm);
  const Split split = split_indices(lm.molecules.size(), cfg.split_ratio, cfg.seed);
  std::vector<Molecule> train, test;
  for (std::size_t i: split.train)
    train.push_back(lm.molecules[i]);
  for (std::size_t i: split.test)
    test.push_back(lm.molecules[i]);

  const DescriptorStats stats = fit_stats(descriptors_of(train));
  const Vocabulary vocab = vocabulary_of(lm.molecules);
  const TokenDataset train_ds = build_token_dataset(train, stats, vocab, cfg.features);
  const TokenDataset test_ds = build_token_dataset(test, stats, vocab, cfg.features);
  {
    std::ofstream os = open_out(in_work(cfg, kStats));
    save_stats(os, stats);
  }
  vocab.save(in_work(cfg, kVocab));
  train_ds.save(in_work(cfg, kTrainTokens));
  test_ds.save(in_work(cfg, kTestTokens));
  {
    std::ofstream os = open_out(in_work(cfg, kManifest));
    os << "source = " << cfg.corpus.string() << '\n'
       << "molecules = " << lm.total << '\n'
       << "valid = " << lm.molecules.size() << '\n'
       << "truncated = " << train_ds.truncated() + test_ds.truncated() << '\n'
       << "split_seed = " << cfg.seed << '\n'
       << "split_ratio = " << cfg.split_ratio << '\n'
       << "train = " << train.size() << '\n'
       << "test = " << test.size() << '\n';
  }
  log << "ingested " << lm.molecules.size() << " of " << lm.total << " molecules ("
      << train.size() << " train, " << test.size() << " test)\n";

  models::EmbedderConfig ec = cfg.embedder;
  ec.tgt_vocab = static_cast<std::size_t>(vocab.size());
  models::Embedder<Real> model(ec, cfg.seed);
  models::EmbedderTrainOptions to;
  to.epochs = cfg.embedder_epochs;
  to.batch_size = cfg.embedder_batch;
  to.stop_at_exact_match = cfg.embedder_stop_at;
  to.seed = cfg.seed;
  to.on_epoch = [&log](const models::EmbedderEpoch &e) {
    log << "epoch " << e.epoch << " train_nll " << e.train_nll << " val_nll "
        << e.val_nll << " exact_match " << e.exact_match << '\n';
  };
  const auto history = models::train_embedder(model, train_ds, &test_ds, to);
  nn::Checkpoint ck("embedder");
  model.save(ck);
  ck.save(in_work(cfg, kEmbedder));
  std::ofstream hs = open_out(in_work(cfg, kEmbedderHistory));
  models::write_history_csv(hs, history);
}

void embed_stage(const PipelineConfig &cfg, const StageOptions &opt) {
  guard_outputs(cfg, opt, { artifact::kEmbeddings });
  std::ostream &log = log_of(opt);
  const Vocabulary vocab = load_vocab(cfg);
  const DescriptorStats stats = load_stats_file(cfg);
  models::Embedder<Real> model = load_embedder(cfg, vocab);

  auto embed_all = [&](const std::vector<Molecule> &mols) {
    const std::size_t L = cfg.embedder.src_len, D = cfg.embedder.model_dim;
    std::vector<Real> values;
    values.reserve(mols.size() * L * D);
    for (const Molecule &m: mols) {
      const Fingerprint fp =
          morgan_fingerprint(m.graph, cfg.features.radius, cfg.features.n_bits);
      const SourceSequence src =
          encode_source(fp, compute_descriptors(m.graph), stats, cfg.features.src_len);
      const Tensor<Real> e = model.encode(src);
      values.insert(values.end(), e.data().begin(), e.data().end());
    }
    return std::make_pair(nn::Shape { mols.size(), L, D }, std::move(values));
  };

  nn::Checkpoint ck("embeddings");
  const LoadedMolecules corpus = load_molecules(cfg.corpus, false, cfg.features);
  auto [cs, cv] = embed_all(corpus.molecules);
  ck.put_raw<Real>("corpus", cs, cv);

  // The labeled set only needs sources, so target length is not enforced.
  FeatureConfig loose = cfg.features;
  loose.tgt_len = std::numeric_limits<int>::max() / 2;
  const LoadedMolecules labeled = load_molecules(cfg.labeled, true, loose);
  log_skipped(log, cfg.labeled, labeled);
  auto [ls, lv] = embed_all(labeled.molecules);
  ck.put_raw<Real>("labeled", ls, lv);
  std::vector<Real> labels;
  for (const Molecule &m: labeled.molecules)
    labels.push_back(static_cast<Real>(m.label));
  ck.put_raw<Real>("labels", { labels.size() }, labels);
  ck.save(in_work(cfg, artifact::kEmbeddings));
  log << "embedded " << corpus.molecules.size() << " corpus and "
      << labeled.molecules.size() << " labeled molecules\n";
}

void train_classifier_stage(const PipelineConfig &cfg, const StageOptions &opt) {
  using namespace artifact;
  guard_outputs(cfg, opt, { kClassifier, kClassifierHistory, kClassifierMetrics });
  std::ostream &log = log_of(opt);
  const nn::Checkpoint emb = nn::Checkpoint::load(require(cfg, kEmbeddings, "embed"));
  const std::vector<Tensor<Real>> embs = unstack(emb.at("labeled"));
  std::vector<int> labels;
  for (double v: emb.at("labels").values)
    labels.push_back(static_cast<int>(v));
  const Split split = split_indices(embs.size(), cfg.split_ratio, cfg.seed, labels);
  std::vector<Tensor<Real>> train_x, test_x;
  std::vector<int> train_y, test_y;
  for (std::size_t i: split.train) {
    train_x.push_back(embs[i]);
    train_y.push_back(labels[i]);
  }
  for (std::size_t i: split.test) {
    test_x.push_back(embs[i]);
    test_y.push_back(labels[i]);
  }

  models::Classifier<Real> model(cfg.classifier, cfg.seed);
  models::ClassifierTrainOptions to;
  to.epochs = cfg.classifier_epochs;
  to.batch_size = cfg.classifier_batch;
  to.weight_classes = cfg.classifier_weighting;
  to.seed = cfg.seed;
  to.on_epoch = [&log](const models::ClassifierEpoch &e) {
    log << "epoch " << e.epoch << " loss " << e.loss << " train_accuracy "
        << e.train_accuracy << '\n';
  };
  const auto history = models::train_classifier(model, train_x, train_y, to);
  nn::Checkpoint ck("classifier");
  model.save(ck);
  ck.save(in_work(cfg, kClassifier));
  {
    std::ofstream os = open_out(in_work(cfg, kClassifierHistory));
    os << "epoch,loss,train_accuracy\n";
    for (const auto &e: history)
      os << e.epoch << ',' << e.loss << ',' << e.train_accuracy << '\n';
  }
  std::ofstream os = open_out(in_work(cfg, kClassifierMetrics));
  os << "split,accuracy,precision,recall,f1,tp,fp,tn,fn,degenerate\n";
  auto row = [&](const char *name, const std::vector<Tensor<Real>> &x,
                 const std::vector<int> &y) {
    if (x.empty())
      return;
    const auto m = models::precision_recall_f1(models::predict(model, x), y);
    os << name << ',' << m.accuracy << ',' << m.precision << ',' << m.recall << ','
       << m.f1 << ',' << m.tp << ',' << m.fp << ',' << m.tn << ',' << m.fn << ','
       << (m.degenerate ? 1 : 0) << '\n';
    log << name << " accuracy " << m.accuracy << " precision " << m.precision
        << " recall " << m.recall << " f1 " << m.f1 << '\n';
  };
  row("train", train_x, train_y);
  row("test", test_x, test_y);
}

void train_gan_stage(const PipelineConfig &cfg, const StageOptions &opt) {
  guard_outputs(cfg, opt, { artifact::kGan, artifact::kGanHistory });
  std::ostream &log = log_of(opt);
  const nn::Checkpoint emb =
      nn::Checkpoint::load(require(cfg, artifact::kEmbeddings, "embed"));
  const std::vector<Tensor<Real>> real = unstack(emb.at("corpus"));
  models::Classifier<Real> classifier = load_classifier(cfg);
  classifier.freeze();
  const Vocabulary vocab = load_vocab(cfg);
  models::Embedder<Real> decoder = load_embedder(cfg, vocab);

  models::RangeGan<Real> gan(cfg.gan, cfg.seed);
  models::PropertyHead<Real> head = [&classifier](const Tensor<Real> &x) {
    return classifier.scores(x, false);
  };
  if (cfg.strict_range) {
    nn::NoGradGuard guard;
    nn::Rng rng = nn::derive_rng(cfg.seed, 0x737472);
    Tensor<Real> y = head(gan.gen(gan.gen.sample_noise(cfg.gan.batch_size, rng)));
    std::vector<double> ys(y.data().begin(), y.data().end());
    range_loss(std::span<const double>(ys), cfg.range, true);
  }
  models::GanTrainOptions to;
  to.seed = cfg.seed;
  to.probe_every = cfg.validity_probe_every;
  to.validity_probe = [&decoder, &vocab](const Tensor<float> &batch) {
    const auto seqs = decoder.greedy_decode(decoder.full_memory(batch));
    std::size_t ok = 0;
    for (const TargetSequence &s: seqs)
      ok += chem::canonicalize(detokenize(s.tokens, vocab).smiles) ? 1 : 0;
    return static_cast<double>(ok) / static_cast<double>(seqs.size());
  };
  to.on_step = [&log](const models::GanStep &s) {
    if (s.step % 50 == 0)
      log << "step " << s.step << " wasserstein " << s.wasserstein_estimate
          << " range_loss " << s.range_loss << " compliance " << s.compliance_rate
          << '\n';
  };
  const auto history = models::train_gan(gan, real, head, cfg.range, to);
  nn::Checkpoint ck("range_gan");
  gan.save(ck);
  ck.save(in_work(cfg, artifact::kGan));
  std::ofstream os = open_out(in_work(cfg, artifact::kGanHistory));
  models::write_gan_history_csv(os, history);
}

void generate_stage(const PipelineConfig &cfg, const StageOptions &opt) {
  guard_outputs(cfg, opt, { artifact::kGenerated });
  models::RangeGan<Real> gan(cfg.gan, cfg.seed);
  gan.load(nn::Checkpoint::load(require(cfg, artifact::kGan, "train-gan")));
  models::Classifier<Real> classifier = load_classifier(cfg);
  const Vocabulary vocab = load_vocab(cfg);
  models::Embedder<Real> decoder = load_embedder(cfg, vocab);
  const auto records = models::generate<Real>(
      cfg.generate_count, gan.gen, decoder, vocab,
      [&classifier](const Tensor<Real> &e) { return classifier.classify(e); },
      cfg.seed);
  std::ofstream os = open_out(in_work(cfg, artifact::kGenerated));
  os << "smiles,score,valid,canonical_smiles\n";
  for (const auto &r: records)
    os << r.smiles << ',' << r.score << ',' << (r.valid ? 1 : 0) << ',' << r.canonical
       << '\n';
  log_of(opt) << "generated " << records.size() << " molecules\n";
}

metrics::GenerationReport evaluate_stage(const PipelineConfig &cfg,
                                         const StageOptions &opt) {
  guard_outputs(cfg, opt, { artifact::kReport, artifact::kReportCsv });
  std::ifstream is(require(cfg, artifact::kGenerated, "generate"));
  std::string line;
  std::getline(is, line);
  std::vector<std::string> smiles;
  std::vector<double> scores;
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    std::stringstream ss(line);
    std::string s, score;
    std::getline(ss, s, ',');
    std::getline(ss, score, ',');
    smiles.push_back(s);
    scores.push_back(std::stod(score));
  }
  metrics::GenerationReport r =
      metrics::build_report(smiles, scores, corpus_canonical(cfg), cfg.range, cfg.seed);
  for (const auto &[k, v]: cfg.entries())
    r.provenance["config." + k] = v;
  {
    std::ofstream os = open_out(in_work(cfg, artifact::kReport));
    metrics::write_report(os, r);
  }
  std::ofstream os = open_out(in_work(cfg, artifact::kReportCsv));
  metrics::write_report_csv_header(os);
  metrics::write_report_csv_row(os, r);
  metrics::write_report(log_of(opt), r);
  return r;
}

void export_descriptors_stage(const PipelineConfig &cfg, const StageOptions &opt) {
  guard_outputs(cfg, opt, { artifact::kDescriptors });
  const LoadedMolecules lm = load_molecules(cfg.corpus, false, cfg.features);
  log_skipped(log_of(opt), cfg.corpus, lm);
  std::ofstream os = open_out(in_work(cfg, artifact::kDescriptors));
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "smiles";
  for (std::string_view n: descriptor_names())
    os << ',' << n;
  os << '\n';
  for (const Molecule &m: lm.molecules) {
    os << m.canonical;
    for (double v: compute_descriptors(m.graph).values)
      os << ',' << v;
    os << '\n';
  }
}

metrics::GenerationReport run_all(const PipelineConfig &cfg, const StageOptions &opt) {
  train_embedder_stage(cfg, opt);
  embed_stage(cfg, opt);
  train_classifier_stage(cfg, opt);
  train_gan_stage(cfg, opt);
  generate_stage(cfg, opt);
  export_descriptors_stage(cfg, opt);
  return evaluate_stage(cfg, opt);
}

}  // namespace molrange::pipeline
