//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance gate. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Pass criterion numbers to run a subset.
//

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "molrange/chem/smiles.hpp"
#include "molrange/descriptors.hpp"
#include "molrange/error.hpp"
#include "molrange/fingerprint.hpp"
#include "molrange/metrics.hpp"
#include "molrange/models/classifier.hpp"
#include "molrange/models/embedder.hpp"
#include "molrange/models/range_gan.hpp"
#include "molrange/pipeline/pipeline.hpp"
#include "molrange/range_spec.hpp"
#include "support/gradcheck.hpp"
#include "support/op_cases.hpp"
#include "support/oracles.hpp"
#include "support/random_molecules.hpp"

namespace {

using namespace molrange;
using chem::MolecularGraph;
namespace fs = std::filesystem;

// Collects failed checks for one criterion.
struct Check {
  std::vector<std::string> failures;
  std::ostringstream note;

  void expect(bool ok, const std::string &what) {
    if (!ok && failures.size() < 5)
      failures.push_back(what);
    else if (!ok)
      failures.back() = what + " (and more)";
  }
  bool ok() const { return failures.empty(); }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

RangeSpec spec(double lb, double ub, double phi = 10.0, double lambda1 = 10.0) {
  RangeSpec s;
  s.y_lb = lb;
  s.y_ub = ub;
  s.phi = phi;
  s.lambda1 = lambda1;
  return s;
}

MolecularGraph parse(std::string_view s) {
  return chem::parse_smiles(s).value();
}

// ---------------------------------------------------------------------------
// 1. Range loss

long double sigmoid_ld(long double x) {
  return 1.0L / (1.0L + std::exp(-x));
}

double loop_range_loss(const std::vector<double> &ys, const RangeSpec &s) {
  long double total = 0;
  int count = 0;
  for (double y: ys) {
    if (y > s.y_lb && y < s.y_ub)
      continue;
    const long double a = s.phi * (static_cast<long double>(y) - s.y_lb);
    const long double b = s.phi * (static_cast<long double>(y) - s.y_ub);
    // Above the range both sigmoids approach 1; use the mirrored pair.
    const long double p = y >= s.y_ub ? sigmoid_ld(-b) - sigmoid_ld(-a)
                                      : sigmoid_ld(a) - sigmoid_ld(b);
    total -= std::log(p);
    ++count;
  }
  return count == 0 ? 0.0 : static_cast<double>(total / count);
}

void criterion_range_loss(Check &c) {
  // Hand evaluation at the midpoint: sigmoid(a) - sigmoid(-a) = tanh(a / 2)
  // with a = phi * half-width.
  const long double p1 = std::tanh(10.0L * 0.25L / 2.0L);
  const long double p2 = std::tanh(10.0L * 0.5L / 2.0L);
  const double got1 = satisfaction_probability(0.75, spec(0.5, 1.0));
  const double got2 = satisfaction_probability(0.5, spec(0.0, 1.0));
  c.expect(std::abs(got1 - static_cast<double>(p1)) < 1e-9, "p(0.75) on [0.5,1] = " + fmt(got1));
  c.expect(std::abs(got2 - static_cast<double>(p2)) < 1e-9, "p(0.5) on [0,1] = " + fmt(got2));
  c.expect(std::round(got1 * 1e4) / 1e4 == 0.8483, "p(0.75) rounds to 0.8483");
  c.expect(std::round(got2 * 1e4) / 1e4 == 0.9866, "p(0.5) rounds to 0.9866");

  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> value(-1.0, 2.0);
  std::uniform_real_distribution<double> bound(-0.5, 1.5);
  std::uniform_int_distribution<int> size(1, 64);
  double worst = 0;
  for (int batch = 0; batch < 1000; ++batch) {
    double lb = bound(rng), ub = bound(rng);
    if (lb > ub)
      std::swap(lb, ub);
    if (ub - lb < 0.05)
      ub = lb + 0.05;
    const RangeSpec s = spec(lb, ub, batch % 2 == 0 ? 10.0 : 3.0);
    std::vector<double> ys(size(rng));
    for (double &y: ys)
      y = value(rng);
    if (batch % 10 == 0)
      ys.push_back(lb);
    const double expect = loop_range_loss(ys, s);
    const auto t = nn::Tensor<double>::from({ ys.size() }, ys);
    worst = std::max({ worst, std::abs(range_loss(ys, s) - expect),
                       std::abs(models::range_loss(t, s).item() - expect) });
  }
  c.expect(worst < 1e-12, "brute-force loop max deviation " + fmt(worst));

  const RangeSpec s = spec(0.5, 1.0);
  c.expect(is_non_compliant(0.5, s) && is_non_compliant(1.0, s) && !is_compliant(0.5, s)
               && !is_compliant(1.0, s),
           "boundary samples are non-compliant");
  const std::vector<double> boundary { 0.75, 1.0 };
  c.expect(range_loss(boundary, s) > 0, "boundary sample contributes to the loss");
  const std::vector<double> inside { 0.51, 0.6, 0.75, 0.999 };
  c.expect(range_loss(inside, s) == 0.0, "all-compliant batch gives exactly 0");
  c.expect(models::range_loss(nn::Tensor<double>::from({ 4 }, inside), s).item() == 0.0,
           "all-compliant tensor batch gives exactly 0");
  c.note << "p=" << fmt(got1) << "," << fmt(got2) << " loop dev " << fmt(worst);
}

// ---------------------------------------------------------------------------
// 2. Gradients

void criterion_gradients(Check &c) {
  double worst_op = 0;
  int n_ops = 0;
  for (const testing::OpCase &op: testing::op_cases()) {
    for (std::uint64_t seed = 1; seed <= 2; ++seed) {
      nn::Rng rng(seed * 7919 + 3);
      const double err = testing::gradcheck(op.fn, op.make(rng));
      c.expect(err < 1e-4, std::string(op.name) + " rel-err " + fmt(err));
      worst_op = std::max(worst_op, err);
    }
    ++n_ops;
  }

  // Range loss alone, then through a frozen desk-shaped property head.
  nn::Rng rng(17);
  const RangeSpec s = spec(0.5, 1.0);
  double worst_loss = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto y = nn::uniform<double>({ 16 }, rng, -0.5, 2.0);
    worst_loss = std::max(worst_loss, testing::gradcheck(
        [&](const std::vector<nn::Tensor<double>> &x) { return models::range_loss(x[0], s); },
        { y }));
  }
  c.expect(worst_loss < 1e-4, "range_loss rel-err " + fmt(worst_loss));

  models::ClassifierConfig cc = models::ClassifierConfig::desk();
  cc.rows = 40;
  cc.cols = 16;
  models::Classifier<double> clf(cc, 5);
  clf.freeze();
  double worst_clf = 0;
  for (int trial = 0; trial < 3; ++trial) {
    const auto emb = nn::randn<double>({ 2, cc.rows, cc.cols }, rng);
    worst_clf = std::max(worst_clf, testing::gradcheck(
        [&](const std::vector<nn::Tensor<double>> &x) {
          const auto y = clf.scores(x[0], false);
          return models::generator_objective(nn::mul_scalar(y, 0.5), y, s);
        },
        { emb }));
  }
  c.expect(worst_clf < 1e-3, "classifier + range loss rel-err " + fmt(worst_clf));

  // dp/dy at the midpoint of [0, 1].
  const RangeSpec unit = spec(0.0, 1.0);
  auto y = nn::Tensor<double>::from({}, { 0.5 }, true);
  const auto p = nn::sub(nn::sigmoid(nn::mul_scalar(nn::add_scalar(y, -unit.y_lb), unit.phi)),
                         nn::sigmoid(nn::mul_scalar(nn::add_scalar(y, -unit.y_ub), unit.phi)));
  p.backward();
  const double mid = std::abs(y.grad()[0]);
  c.expect(mid < 1e-3, "midpoint |dp/dy| = " + fmt(mid));
  c.note << n_ops << " ops max " << fmt(worst_op) << ", loss " << fmt(worst_loss)
         << ", classifier " << fmt(worst_clf) << ", midpoint " << fmt(mid);
}

// ---------------------------------------------------------------------------
// 3. Toy GAN

double toy_gan_compliance(double lambda1, std::uint64_t seed, Check &c) {
  models::GanConfig cfg;
  cfg.rows = 8;
  cfg.cols = 16;
  cfg.gen_channels = { 4, 16 };
  cfg.disc_channels = { 16, 8 };
  cfg.batch_size = 32;
  cfg.steps = 2000;
  cfg.gen_optim.lr = 1e-3;
  cfg.disc_optim.lr = 1e-3;

  // Real samples: a per-sample offset plus noise, so the mean property is
  // spread over [-0.5, 1] and only partly inside the range.
  nn::Rng rng(1000 + seed);
  std::uniform_real_distribution<double> offset(-0.5, 1.0);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<nn::Tensor<double>> real;
  for (int i = 0; i < 512; ++i) {
    const double o = offset(rng);
    std::vector<double> v(cfg.rows * cfg.cols);
    for (double &x: v)
      x = o + noise(rng);
    real.push_back(nn::Tensor<double>::from({ cfg.rows, cfg.cols }, std::move(v)));
  }

  models::RangeGan<double> gan(cfg, seed);
  const RangeSpec s = spec(0.5, 1.0, 10.0, lambda1);
  const models::PropertyHead<double> head = [](const nn::Tensor<double> &x) {
    return nn::mean(nn::mean(x, -1), -1);
  };
  models::GanTrainOptions opt;
  opt.seed = seed;
  const auto history = models::train_gan(gan, real, head, s, opt);
  c.expect(history.size() == cfg.steps, "toy GAN ran every step");
  for (const models::GanStep &step: history)
    c.expect(step.max_abs_critic_weight <= cfg.clip,
             "critic weight " + fmt(step.max_abs_critic_weight) + " at step "
                 + std::to_string(step.step));

  std::size_t inside = 0;
  const auto embs = models::generate_embeddings(gan.gen, 1000, 99 + seed);
  for (const auto &e: embs) {
    double m = 0;
    for (double x: e.data())
      m += x;
    inside += is_compliant(m / static_cast<double>(e.numel()), s) ? 1 : 0;
  }
  return static_cast<double>(inside) / static_cast<double>(embs.size());
}

double median3(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[1];
}

void criterion_toy_gan(Check &c) {
  std::vector<double> with, without;
  for (std::uint64_t seed: { 1, 2, 3 }) {
    with.push_back(toy_gan_compliance(10.0, seed, c));
    without.push_back(toy_gan_compliance(0.0, seed, c));
  }
  const double m_with = median3(with), m_without = median3(without);
  c.expect(m_with >= 0.9, "median compliance with lambda1=10 is " + fmt(m_with));
  c.expect(m_without <= 0.6, "median compliance with lambda1=0 is " + fmt(m_without));
  c.note << "median compliance " << fmt(m_with) << " (lambda1=10) vs " << fmt(m_without)
         << " (lambda1=0)";
}

// ---------------------------------------------------------------------------
// 4. Reconversion

void criterion_reconversion(Check &c) {
  const pipeline::PipelineConfig cfg = pipeline::load_config(nullptr, "desk", {});
  const auto lm = pipeline::load_molecules(cfg.corpus, false, cfg.features);
  const DescriptorStats stats = fit_stats(pipeline::descriptors_of(lm.molecules));
  const Vocabulary vocab = pipeline::vocabulary_of(lm.molecules);
  const TokenDataset ds = pipeline::build_token_dataset(lm.molecules, stats, vocab, cfg.features);
  c.expect(ds.size() == 200, "corpus has " + std::to_string(ds.size()) + " molecules");

  models::EmbedderConfig ec = cfg.embedder;
  ec.tgt_vocab = vocab.size();
  models::Embedder<float> model(ec, cfg.seed);
  nn::Optimizer<float> optim(nn::tensors_of(model.parameters()), ec.optim);

  auto greedy_exact = [&] {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < ds.size(); ++i)
      ok += model.greedy_decode(model.encode(ds.sources[i])).tokens == ds.targets[i].tokens;
    return static_cast<double>(ok) / static_cast<double>(ds.size());
  };

  std::size_t epoch = 0;
  double exact = 0;
  while (epoch < 300 && exact < 0.9) {
    models::EmbedderTrainOptions opt;
    opt.epochs = 5;
    opt.batch_size = cfg.embedder_batch;
    opt.seed = cfg.seed + epoch;
    const auto history = models::train_embedder(model, ds, nullptr, opt, &optim);
    epoch += history.size();
    if (history.back().exact_match >= 0.9)
      exact = greedy_exact();
  }
  c.expect(exact >= 0.9, "greedy exact reconstruction " + fmt(exact) + " after "
                             + std::to_string(epoch) + " epochs");
  c.note << "greedy exact " << fmt(exact) << " after " << epoch << " epochs";
}

// ---------------------------------------------------------------------------
// 5. Fingerprints

void criterion_fingerprint(Check &c) {
  std::mt19937_64 rng(505);
  int max_heavy = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const MolecularGraph m = testing::random_molecule(rng, 12);
    max_heavy = std::max(max_heavy, m.num_atoms());
    const Fingerprint ref = morgan_fingerprint(m, 2, 2048);
    c.expect(ref == testing::oracle_fingerprint(m, 2, 2048),
             "oracle mismatch on " + chem::write_smiles(m));
    for (int k = 0; k < 20; ++k) {
      const MolecularGraph p =
          chem::permute_atoms(m, testing::random_permutation(m.num_atoms(), rng));
      c.expect(morgan_fingerprint(p, 2, 2048) == ref,
               "permutation changed bits of " + chem::write_smiles(m));
    }
  }
  c.expect(max_heavy <= 12, "molecule with " + std::to_string(max_heavy) + " heavy atoms");
  c.note << "50 molecules x 20 shuffles, up to " << max_heavy << " heavy atoms";
}

// ---------------------------------------------------------------------------
// 6. Canonicalization

void criterion_canonical(Check &c) {
  const std::vector<std::string> corpus = testing::corpus_smiles();
  std::mt19937_64 rng(606);
  for (std::size_t i = 0; i < 100 && i < corpus.size(); ++i) {
    const MolecularGraph m = parse(corpus[i]);
    const std::string ref = chem::canonical_smiles(m);
    for (int k = 0; k < 20; ++k) {
      const MolecularGraph p =
          chem::permute_atoms(m, testing::random_permutation(m.num_atoms(), rng));
      c.expect(chem::canonical_smiles(p) == ref, "permutation changed " + corpus[i]);
      c.expect(chem::canonical_smiles(parse(chem::write_smiles(p))) == ref,
               "reparsed permutation changed " + corpus[i]);
    }
  }
  for (const std::string &s: corpus) {
    const MolecularGraph m = parse(s);
    const auto back = chem::parse_smiles(chem::write_smiles(m));
    c.expect(back.ok() && testing::isomorphic(m, back.value()),
             "round trip not isomorphic for " + s);
  }
  c.note << "100 x 20 permutations, " << corpus.size() << " round trips";
}

// ---------------------------------------------------------------------------
// 7. Metrics

double loop_diversity(const std::vector<Fingerprint> &fps) {
  double total = 0;
  int pairs = 0;
  for (std::size_t i = 0; i < fps.size(); ++i)
    for (std::size_t j = i + 1; j < fps.size(); ++j) {
      int both = 0, either = 0;
      for (int b = 0; b < fps[i].n_bits(); ++b) {
        both += fps[i].test(b) && fps[j].test(b);
        either += fps[i].test(b) || fps[j].test(b);
      }
      total += 1.0 - (either == 0 ? 1.0 : static_cast<double>(both) / either);
      ++pairs;
    }
  return 1.0 - total / pairs;
}

void criterion_metrics(Check &c) {
  const std::vector<std::string> generated { "CCO", "c1ccccc1", "C1CC", "CC(C", "OCC",
                                             "[CH5]", "N", "CCN", "xyz", "" };
  c.expect(metrics::validity(generated) == 0.5, "validity != 5/10");

  const std::vector<std::string> valid { "CCO", "c1ccccc1", "OCC", "N", "CCN",
                                         "C(O)C", "N", "CCN", "CCCl", "ClCC" };
  c.expect(metrics::uniqueness(valid) == 0.5, "uniqueness != 5/10");

  std::vector<std::string> unique, train;
  for (const char *s: { "CCO", "c1ccccc1", "N", "CCN", "CCCl", "CC", "CCC", "O", "C=O", "C#N" })
    unique.push_back(*chem::canonicalize(s));
  for (const char *s: { "OCC", "N", "CC", "C" })
    train.push_back(*chem::canonicalize(s));
  c.expect(metrics::novelty(unique, train) == 0.7, "novelty != 7/10");

  const std::vector<double> scores { 0.5, 0.6, 0.7, 1.0, 0.99, 0.2, 1.1, 0.75, 0.51, 0.49 };
  c.expect(metrics::property_compliance(scores, spec(0.5, 1.0)) == 0.5, "compliance != 5/10");

  std::vector<Fingerprint> fps;
  for (const std::string &s: unique)
    fps.push_back(morgan_fingerprint(parse(s)));
  const double div = metrics::internal_diversity(fps, true);
  const double loop = loop_diversity(fps);
  c.expect(std::abs(div - loop) < 1e-12, "diversity " + fmt(div) + " vs loop " + fmt(loop));

  // Three hand-made fingerprints: Tanimoto 1/3, 2/3, 2/3.
  std::vector<Fingerprint> three(3, Fingerprint(64, 0));
  three[0].set(1), three[0].set(2);
  three[1].set(2), three[1].set(3);
  three[2].set(1), three[2].set(2), three[2].set(3);
  c.expect(std::abs(metrics::internal_diversity(three, true) - 5.0 / 9.0) < 1e-15,
           "diversity of the hand triple != 5/9");
  c.note << "diversity " << fmt(div);
}

// ---------------------------------------------------------------------------
// 8. Descriptors

void criterion_descriptors(Check &c) {
  const auto names = descriptor_names();
  auto col = [&](std::string_view name) {
    return static_cast<std::size_t>(std::find(names.begin(), names.end(), name) - names.begin());
  };
  const std::size_t wiener = col("wiener_index"), diameter = col("diameter"),
                    weight = col("mol_weight");
  std::mt19937_64 rng(808);
  for (int trial = 0; trial < 50; ++trial) {
    const MolecularGraph m = testing::random_molecule(rng, 20);
    const auto [w, d] = testing::bfs_distance_oracle(m);
    const DescriptorSet ds = compute_descriptors(m);
    c.expect(ds[wiener] == w && ds[diameter] == d, "BFS mismatch on " + chem::write_smiles(m));
  }
  const double benzene = compute_descriptors(parse("c1ccccc1"))[wiener];
  const double methane = compute_descriptors(parse("C"))[weight];
  c.expect(std::abs(benzene - 27.0) < 1e-3, "benzene Wiener " + fmt(benzene));
  c.expect(std::abs(methane - 16.043) < 1e-3, "methane MW " + fmt(methane));
  c.note << "benzene Wiener " << fmt(benzene) << ", methane MW " << fmt(methane);
}

// ---------------------------------------------------------------------------
// 9. Determinism

std::string slurp(const fs::path &p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void criterion_determinism(Check &c) {
  std::string text[2];
  std::string generated[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = fs::temp_directory_path() / ("molrange_acceptance_" + std::to_string(run));
    fs::remove_all(dir);
    const pipeline::PipelineConfig cfg =
        pipeline::load_config(nullptr, "desk", { { "paths.work_dir", dir.string() } });
    metrics::GenerationReport r = pipeline::run_all(cfg, {});
    r.provenance.erase("config.paths.work_dir");
    std::ostringstream os;
    metrics::write_report(os, r);
    text[run] = os.str();
    generated[run] = slurp(dir / pipeline::artifact::kGenerated);
    if (run == 1)
      c.note << "validity " << fmt(r.validity) << ", uniqueness " << fmt(r.uniqueness)
             << ", novelty " << fmt(r.novelty) << ", compliance " << fmt(r.property_compliance);
  }
  c.expect(text[0] == text[1], "reports differ");
  c.expect(generated[0] == generated[1], "generated molecules differ");
}

struct Criterion {
  int id;
  const char *name;
  double limit_s;  // <= 0: no runtime bound
  std::function<void(Check &)> run;
};

}  // namespace

int main(int argc, char **argv) {
  const std::vector<Criterion> all {
    { 1, "range-loss unit suite", 60, criterion_range_loss },
    { 2, "gradient correctness", 600, criterion_gradients },
    { 3, "toy GAN", 1200, criterion_toy_gan },
    { 4, "reconversion", 1800, criterion_reconversion },
    { 5, "fingerprint oracle", 300, criterion_fingerprint },
    { 6, "canonicalization", 300, criterion_canonical },
    { 7, "metrics exactness", 0, criterion_metrics },
    { 8, "descriptor oracle", 0, criterion_descriptors },
    { 9, "end-to-end determinism", 0, criterion_determinism },
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i)
    only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion &cr: all) {
    if (!only.empty() && !only.count(cr.id))
      continue;
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cr.run(c);
    } catch (const std::exception &e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cr.limit_s > 0)
      c.expect(secs < cr.limit_s, "runtime " + fmt(secs) + " s over " + fmt(cr.limit_s) + " s");
    std::printf("criterion %d %-24s %s  (%.1f s)  %s\n", cr.id, cr.name,
                c.ok() ? "PASS" : "FAIL", secs, c.note.str().c_str());
    for (const std::string &f: c.failures)
      std::printf("    %s\n", f.c_str());
    std::fflush(stdout);
    failed += c.ok() ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
