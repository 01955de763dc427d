//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <cmath>

#include "molrange/chem/smiles.hpp"
#include "molrange/error.hpp"
#include "molrange/models/range_gan.hpp"
#include "support/gradcheck.hpp"

namespace molrange::models {
namespace {

constexpr int kBits = 64;
constexpr int kSrcLen = 48;
constexpr int kTgtLen = 24;

struct TinyData {
  Vocabulary vocab;
  TokenDataset ds;
};

TinyData tiny_data(const std::vector<std::string> &smiles) {
  TinyData d;
  std::vector<std::string> canon;
  std::vector<DescriptorSet> descs;
  std::vector<chem::MolecularGraph> graphs;
  for (const std::string &s: smiles) {
    canon.push_back(*chem::canonicalize(s));
    graphs.push_back(chem::parse_smiles(canon.back()).value());
    descs.push_back(compute_descriptors(graphs.back()));
  }
  const DescriptorStats stats = fit_stats(descs);
  d.vocab = build_target_vocabulary(canon);
  d.ds.source_length = kSrcLen;
  d.ds.target_length = kTgtLen;
  for (std::size_t i = 0; i < smiles.size(); ++i) {
    d.ds.sources.push_back(
        encode_source(morgan_fingerprint(graphs[i], 1, kBits), descs[i], stats, kSrcLen));
    d.ds.targets.push_back(tokenize_smiles(canon[i], d.vocab, kTgtLen));
  }
  return d;
}

EmbedderConfig tiny_embedder(const Vocabulary &vocab) {
  EmbedderConfig c;
  c.layers = 1;
  c.heads = 2;
  c.model_dim = 16;
  c.ff_dim = 32;
  c.src_len = kSrcLen;
  c.tgt_len = kTgtLen;
  c.src_vocab = SourceLayout { kBits }.vocab_size();
  c.tgt_vocab = vocab.size();
  c.optim.lr = 3e-3;
  return c;
}

const std::vector<std::string> kMolecules { "CCO", "c1ccccc1O", "CC(=O)N", "CCCCl", "OC(=O)C=C" };

TEST(Embedder, EncodeShapeAndZeroPadRows) {
  const TinyData d = tiny_data(kMolecules);
  Embedder<float> model(tiny_embedder(d.vocab), 1);
  for (const SourceSequence &s: d.ds.sources) {
    const Tensor<float> e = model.encode(s);
    ASSERT_EQ(e.shape(), (Shape { kSrcLen, 16 }));
    for (std::size_t r = s.content_length(); r < kSrcLen; ++r)
      for (std::size_t c = 0; c < 16; ++c)
        ASSERT_EQ(e.values()[r * 16 + c], 0.0f);
  }
}

TEST(Embedder, BatchingDoesNotChangeEncodings) {
  const TinyData d = tiny_data(kMolecules);
  Embedder<float> model(tiny_embedder(d.vocab), 2);
  std::vector<const SourceSequence *> all;
  for (const SourceSequence &s: d.ds.sources)
    all.push_back(&s);
  std::vector<std::size_t> lengths;
  nn::NoGradGuard guard;
  const Tensor<float> batch = model.encode_batch(all, false, lengths);
  const std::size_t Ls = batch.dim(1);
  for (std::size_t b = 0; b < all.size(); ++b) {
    const Tensor<float> alone = model.encode(*all[b]);
    for (std::size_t r = 0; r < Ls; ++r)
      for (std::size_t c = 0; c < 16; ++c)
        ASSERT_NEAR(batch.values()[(b * Ls + r) * 16 + c], alone.values()[r * 16 + c], 1e-5);
  }
}

TEST(Embedder, CompactMemoryEqualsFullMemory) {
  const TinyData d = tiny_data(kMolecules);
  Embedder<double> model(tiny_embedder(d.vocab), 3);
  nn::NoGradGuard guard;
  for (const SourceSequence &s: d.ds.sources) {
    std::vector<std::size_t> lengths;
    const Tensor<double> enc = model.encode_batch({ &s }, false, lengths);
    const Tensor<double> full = nn::reshape(model.encode(s), { 1, kSrcLen, 16 });
    const std::vector<int> ids(d.ds.targets[0].tokens.begin(),
                               d.ds.targets[0].tokens.begin() + 8);
    const Tensor<double> a = model.decode_train(model.compact_memory(enc, lengths), ids, 1, false);
    const Tensor<double> b = model.decode_train(model.full_memory(full), ids, 1, false);
    for (std::size_t i = 0; i < a.numel(); ++i)
      ASSERT_NEAR(a.values()[i], b.values()[i], 1e-9);
  }
}

TEST(Embedder, GreedyDecodeIsConsistentWithTeacherForcing) {
  const TinyData d = tiny_data(kMolecules);
  Embedder<double> model(tiny_embedder(d.vocab), 4);
  nn::NoGradGuard guard;
  const Tensor<double> emb = model.encode(d.ds.sources[1]);
  const TargetSequence out = model.greedy_decode(emb);
  ASSERT_EQ(out.tokens.front(), kBosId);
  std::size_t n = 1;
  while (n < out.tokens.size() && out.tokens[n] != kEosId && out.tokens[n] != kPadId)
    ++n;
  const std::size_t steps = std::min(n, out.tokens.size() - 1);
  const std::vector<int> ids(out.tokens.begin(), out.tokens.begin() + steps);
  const Tensor<double> logits =
      model.decode_train(model.full_memory(nn::reshape(emb, { 1, kSrcLen, 16 })), ids, 1, false);
  const std::size_t V = logits.dim(-1);
  for (std::size_t t = 0; t < steps; ++t) {
    const double *row = logits.data().data() + t * V;
    EXPECT_EQ(std::max_element(row, row + V) - row, out.tokens[t + 1]) << t;
  }
}

TEST(Embedder, LearnsToReconstructTinyCorpus) {
  const TinyData d = tiny_data(kMolecules);
  Embedder<float> model(tiny_embedder(d.vocab), 5);
  EmbedderTrainOptions opt;
  opt.epochs = 200;
  opt.batch_size = 5;
  opt.stop_at_exact_match = 1.0;
  const auto history = train_embedder(model, d.ds, nullptr, opt);
  ASSERT_FALSE(history.empty());
  EXPECT_EQ(history.back().exact_match, 1.0);
  EXPECT_LT(history.back().train_nll, history.front().train_nll);
  for (std::size_t i = 0; i < d.ds.size(); ++i) {
    const TargetSequence out = model.greedy_decode(model.encode(d.ds.sources[i]));
    EXPECT_EQ(detokenize(out.tokens, d.vocab).smiles,
              detokenize(d.ds.targets[i].tokens, d.vocab).smiles);
  }
}

TEST(Embedder, CheckpointRoundTrip) {
  const TinyData d = tiny_data(kMolecules);
  Embedder<float> a(tiny_embedder(d.vocab), 6);
  nn::Checkpoint ck("embedder");
  a.save(ck);
  Embedder<float> b(tiny_embedder(d.vocab), 7);
  b.load(ck);
  for (const SourceSequence &s: d.ds.sources) {
    EXPECT_EQ(a.encode(s).values(), b.encode(s).values());
    EXPECT_EQ(a.greedy_decode(a.encode(s)).tokens,
              b.greedy_decode(b.encode(s)).tokens);
  }
  EmbedderConfig wider = tiny_embedder(d.vocab);
  wider.model_dim = 32;
  Embedder<float> c(wider, 6);
  EXPECT_THROW(c.load(ck), Error);
}

TEST(Embedder, ConfigValidation) {
  EmbedderConfig c = tiny_embedder(Vocabulary {});
  c.heads = 3;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_EQ(EmbedderConfig::paper().layers, 6U);
  EXPECT_EQ(EmbedderConfig::paper().model_dim, 512U);
  EXPECT_EQ(EmbedderConfig::paper().heads, 8U);
}

TEST(Embedder, EmptyDatasetThrows) {
  const TinyData d = tiny_data(kMolecules);
  Embedder<float> model(tiny_embedder(d.vocab), 8);
  EXPECT_THROW(train_embedder(model, TokenDataset {}, nullptr, {}), Error);
}

ClassifierConfig tiny_classifier() {
  ClassifierConfig c;
  c.rows = 12;
  c.cols = 8;
  c.channels = { 2, 3 };
  c.kernel = 3;
  c.stride = 2;
  c.padding = 1;
  c.dropout = 0.2;
  return c;
}

TEST(Classifier, GradientThroughClassifierAndRangeLoss) {
  Classifier<double> clf(tiny_classifier(), 1);
  clf.freeze();
  RangeSpec spec;
  nn::Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor<double> emb = nn::randn<double>({ 4, 12, 8 }, rng);
    const double err = testing::gradcheck(
        [&](const std::vector<Tensor<double>> &x) {
          return range_loss(clf.scores(x[0], false), spec) + nn::mean(clf.scores(x[0], false));
        },
        { emb });
    EXPECT_LT(err, 1e-3) << trial;
  }
}

TEST(Classifier, FrozenParametersReceiveNoGradient) {
  Classifier<double> clf(tiny_classifier(), 1);
  clf.freeze();
  nn::Rng rng(3);
  Tensor<double> emb = nn::randn<double>({ 2, 12, 8 }, rng, 1.0, true);
  nn::sum(clf.scores(emb, false)).backward();
  EXPECT_TRUE(emb.has_grad());
  for (const auto &p: clf.parameters())
    EXPECT_FALSE(p.tensor.has_grad()) << p.name;
}

TEST(Classifier, LearnsSeparableToySet) {
  nn::Rng rng(4);
  std::vector<Tensor<float>> embs;
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    const int y = i % 4 == 0 ? 0 : 1;
    Tensor<float> e = nn::randn<float>({ 12, 8 }, rng, 0.5f);
    for (float &v: e.values())
      v += y ? 1.0f : -1.0f;
    embs.push_back(e);
    labels.push_back(y);
  }
  Classifier<float> clf(tiny_classifier(), 5);
  ClassifierTrainOptions opt;
  opt.epochs = 30;
  opt.batch_size = 8;
  train_classifier(clf, embs, labels, opt);
  const ClassificationMetrics m = precision_recall_f1(predict(clf, embs), labels);
  EXPECT_EQ(m.accuracy, 1.0);

  nn::Checkpoint ck("classifier");
  clf.save(ck);
  Classifier<float> back(tiny_classifier(), 99);
  back.load(ck);
  EXPECT_EQ(predict(back, embs), predict(clf, embs));
}

TEST(Classifier, DatasetErrors) {
  Classifier<float> clf(tiny_classifier(), 5);
  EXPECT_THROW(train_classifier(clf, {}, {}, {}), Error);
  std::vector<Tensor<float>> embs(3, Tensor<float>::zeros({ 12, 8 }));
  EXPECT_THROW(train_classifier(clf, embs, { 1, 1, 1 }, {}), Error);
}

TEST(ClassifierMetrics, HandValues) {
  const std::vector<double> p { 0.9, 0.8, 0.3, 0.6, 0.1, 0.5 };
  const std::vector<int> y { 1, 0, 1, 1, 0, 0 };
  const ClassificationMetrics m = precision_recall_f1(p, y);
  EXPECT_EQ(m.tp, 2U);
  EXPECT_EQ(m.fp, 2U);
  EXPECT_EQ(m.tn, 1U);
  EXPECT_EQ(m.fn, 1U);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.5);
  EXPECT_DOUBLE_EQ(m.precision, 0.5);
  EXPECT_DOUBLE_EQ(m.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.f1, 2 * 0.5 * (2.0 / 3.0) / (0.5 + 2.0 / 3.0));
  EXPECT_FALSE(m.degenerate);
  const std::vector<double> none { 0.1, 0.2 };
  const std::vector<int> neg { 0, 0 };
  EXPECT_TRUE(precision_recall_f1(none, neg).degenerate);
  const auto w = inverse_frequency_weights(y);
  EXPECT_DOUBLE_EQ(w[0], 1.0);
  EXPECT_DOUBLE_EQ(w[1], 1.0);
  const std::vector<int> skew { 1, 1, 1, 0 };
  const auto ws = inverse_frequency_weights(skew);
  EXPECT_DOUBLE_EQ(ws[0], 2.0);
  EXPECT_DOUBLE_EQ(ws[1], 4.0 / 6.0);
}

GanConfig tiny_gan() {
  GanConfig c;
  c.rows = 8;
  c.cols = 16;
  c.gen_channels = { 4, 8 };
  c.disc_channels = { 8, 4 };
  c.batch_size = 8;
  c.steps = 20;
  return c;
}

std::vector<Tensor<float>> toy_real(std::size_t n, std::uint64_t seed) {
  nn::Rng rng(seed);
  std::vector<Tensor<float>> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(nn::randn<float>({ 8, 16 }, rng, 0.3f) + 0.75f);
  return out;
}

PropertyHead<float> mean_head() {
  return [](const Tensor<float> &x) { return nn::mean(nn::mean(x, -1), -1); };
}

TEST(RangeGan, Shapes) {
  RangeGan<float> gan(tiny_gan(), 1);
  nn::Rng rng(1);
  const Tensor<float> fake = gan.gen(gan.gen.sample_noise(5, rng));
  EXPECT_EQ(fake.shape(), (Shape { 5, 8, 16 }));
  EXPECT_EQ(gan.disc(fake).shape(), (Shape { 5 }));
}

TEST(RangeGan, PaperPresetShapes) {
  RangeGan<float> gan(GanConfig::paper(), 1);
  nn::Rng rng(1);
  const Tensor<float> fake = gan.gen(gan.gen.sample_noise(1, rng));
  EXPECT_EQ(fake.shape(), (Shape { 1, 150, 512 }));
  EXPECT_EQ(gan.disc(fake).shape(), (Shape { 1 }));
  // Five stride-1 critic layers keep all 150 rows: 150 x 16 into the head.
  const auto params = gan.disc.parameters();
  EXPECT_EQ(params.back().tensor.numel(), 1U);
  EXPECT_EQ(params[params.size() - 2].tensor.numel(), 150U * 16U);
}

TEST(RangeGan, CriticWeightsStayClipped) {
  RangeGan<float> gan(tiny_gan(), 2);
  GanTrainOptions opt;
  opt.seed = 2;
  const auto history = train_gan(gan, toy_real(64, 1), mean_head(), RangeSpec {}, opt);
  ASSERT_EQ(history.size(), 20U);
  for (const GanStep &s: history)
    EXPECT_LE(s.max_abs_critic_weight, 0.1 + 1e-7);
  EXPECT_LE(nn::max_abs(nn::tensors_of(gan.disc.parameters())), 0.1f);
}

TEST(RangeGan, LambdaZeroIgnoresPropertyHead) {
  RangeSpec off;
  off.lambda1 = 0.0;
  RangeGan<float> a(tiny_gan(), 3), b(tiny_gan(), 3);
  GanTrainOptions opt;
  opt.seed = 3;
  train_gan(a, toy_real(64, 2), mean_head(), off, opt);
  const PropertyHead<float> other = [](const Tensor<float> &x) {
    return nn::mul_scalar(nn::sum(nn::sum(x, -1), -1), 5.0f);
  };
  train_gan(b, toy_real(64, 2), other, off, opt);
  const auto pa = nn::tensors_of(a.gen.parameters());
  const auto pb = nn::tensors_of(b.gen.parameters());
  for (std::size_t i = 0; i < pa.size(); ++i)
    EXPECT_EQ(pa[i].values(), pb[i].values());
}

TEST(RangeGan, DeterministicAndCheckpointed) {
  RangeGan<float> a(tiny_gan(), 4), b(tiny_gan(), 4);
  GanTrainOptions opt;
  opt.seed = 4;
  const auto ha = train_gan(a, toy_real(64, 3), mean_head(), RangeSpec {}, opt);
  const auto hb = train_gan(b, toy_real(64, 3), mean_head(), RangeSpec {}, opt);
  for (std::size_t i = 0; i < ha.size(); ++i)
    EXPECT_EQ(ha[i].wasserstein_estimate, hb[i].wasserstein_estimate);
  nn::Checkpoint ck("range_gan");
  a.save(ck);
  RangeGan<float> c(tiny_gan(), 77);
  c.load(ck);
  const auto ea = generate_embeddings(a.gen, 6, 9);
  const auto ec = generate_embeddings(c.gen, 6, 9);
  ASSERT_EQ(ea.size(), 6U);
  for (std::size_t i = 0; i < ea.size(); ++i)
    EXPECT_EQ(ea[i].values(), ec[i].values());
}

TEST(RangeGan, RejectsBadInputs) {
  RangeGan<float> gan(tiny_gan(), 5);
  EXPECT_THROW(train_gan(gan, {}, mean_head(), RangeSpec {}), Error);
  std::vector<Tensor<float>> wrong { Tensor<float>::zeros({ 3, 3 }) };
  EXPECT_THROW(train_gan(gan, wrong, mean_head(), RangeSpec {}), Error);
  GanConfig bad = tiny_gan();
  bad.clip = 0;
  EXPECT_THROW(bad.validate(), Error);
}

}  // namespace
}  // namespace molrange::models
