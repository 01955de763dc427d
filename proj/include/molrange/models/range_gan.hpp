//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "molrange/chem/smiles.hpp"
#include "molrange/models/classifier.hpp"
#include "molrange/models/embedder.hpp"
#include "molrange/nn/checkpoint.hpp"
#include "molrange/nn/layers.hpp"
#include "molrange/nn/optim.hpp"
#include "molrange/range_spec.hpp"

namespace molrange::models {

// ---------------------------------------------------------------------------
// Differentiable range loss

/// Mean -log p(y) over the non-compliant entries of y [N]; a constant 0
/// when every entry is strictly inside the range.
template <class T>
Tensor<T> range_loss(const Tensor<T> &y, const RangeSpec &spec) {
  std::vector<T> mask(y.numel(), T(0));
  std::size_t count = 0;
  for (std::size_t i = 0; i < y.numel(); ++i) {
    if (is_non_compliant(static_cast<double>(y.data()[i]), spec)) {
      mask[i] = T(1);
      ++count;
    }
  }
  if (count == 0)
    return Tensor<T>::scalar(T(0));
  const T phi = static_cast<T>(spec.phi);
  Tensor<T> a = mul_scalar(add_scalar(y, static_cast<T>(-spec.y_lb)), phi);
  Tensor<T> b = mul_scalar(add_scalar(y, static_cast<T>(-spec.y_ub)), phi);
  const T width_term = static_cast<T>(
      -std::log1p(-std::exp(-spec.phi * (spec.y_ub - spec.y_lb))));
  Tensor<T> nll = add_scalar(add(softplus(-a), softplus(b)), width_term);
  Tensor<T> m = Tensor<T>::from(y.shape(), std::move(mask));
  return mul_scalar(sum(mul(nll, m)), T(1) / static_cast<T>(count));
}

/// -mean(critic) + lambda1 * range_loss; the range term is omitted entirely
/// when lambda1 == 0.
template <class T>
Tensor<T> generator_objective(const Tensor<T> &critic_fake, const Tensor<T> &y,
                              const RangeSpec &spec) {
  Tensor<T> loss = -mean(critic_fake);
  if (spec.lambda1 == 0.0)
    return loss;
  return add(loss, mul_scalar(range_loss(y, spec), static_cast<T>(spec.lambda1)));
}

/// mean(critic on fake) - mean(critic on real).
template <class T>
Tensor<T> discriminator_objective(const Tensor<T> &critic_real,
                                  const Tensor<T> &critic_fake) {
  if (critic_real.numel() == 0 || critic_fake.numel() == 0)
    throw Error(ErrorKind::kEmptyInput, "critic batch is empty");
  return sub(mean(critic_fake), mean(critic_real));
}

// ---------------------------------------------------------------------------
// Networks

struct GanConfig {
  std::size_t rows = 150;  // output embedding rows
  std::size_t cols = 64;   // output embedding width; also the noise length
  std::vector<std::size_t> gen_channels { 4, 16, 64 };
  std::size_t gen_kernel = 3;
  std::vector<std::size_t> disc_channels { 32, 16 };
  std::size_t disc_kernel = 3;
  std::size_t disc_stride = 2;
  double leaky_slope = 0.2;
  double clip = 0.1;
  std::size_t critic_steps = 5;
  std::size_t batch_size = 16;
  std::size_t steps = 500;  // generator updates
  nn::OptimizerConfig gen_optim { nn::OptimizerKind::kSgd, 1e-3, 0.9, 0.999, 1e-8 };
  nn::OptimizerConfig disc_optim { nn::OptimizerKind::kSgd, 1e-3, 0.9, 0.999, 1e-8 };

  static GanConfig desk() {
    GanConfig c;
    c.gen_optim = { nn::OptimizerKind::kAdam, 1e-4, 0.9, 0.999, 1e-8 };
    c.disc_optim = c.gen_optim;
    return c;
  }
  static GanConfig paper() {
    GanConfig c;
    c.rows = 150;
    c.cols = 512;
    c.gen_channels = { 4, 16, 64, 256, 1024 };
    c.disc_channels = { 256, 128, 64, 32, 16 };
    c.disc_stride = 1;
    return c;
  }

  std::size_t noise_dim() const { return cols; }

  void validate() const {
    auto fail = [](const std::string &key, const std::string &why) {
      throw Error(ErrorKind::kConfigInvalid, "gan." + key + ": " + why);
    };
    if (!(clip > 0))
      fail("clip", "must be positive");
    if (critic_steps < 1)
      fail("critic_steps", "must be at least 1");
    if (batch_size < 1)
      fail("batch_size", "must be at least 1");
    if (disc_stride < 1)
      fail("disc_stride", "must be at least 1");
    if (gen_channels.empty() || disc_channels.empty())
      fail("gen_channels", "layer plans must be non-empty");
    if (rows == 0 || cols == 0)
      fail("rows", "output shape must be non-empty");
  }
};

/// Noise [B, 1, cols] -> length-preserving conv1d stack -> a linear map
/// over the channel axis to `rows` -> [B, rows, cols].
template <class T>
class Generator {
public:
  Generator() = default;
  Generator(const GanConfig &cfg, Rng &rng): cfg_(cfg) {
    std::size_t cin = 1;
    for (std::size_t c: cfg.gen_channels) {
      convs_.emplace_back(cin, c, cfg.gen_kernel, 1, cfg.gen_kernel / 2, rng);
      cin = c;
    }
    fc_ = nn::Linear<T>(cin, cfg.rows, rng);
  }

  Tensor<T> operator()(const Tensor<T> &z) const {
    Tensor<T> x = z;
    for (const nn::Conv1d<T> &conv: convs_)
      x = leaky_relu(conv(x), static_cast<T>(cfg_.leaky_slope));
    // [B, C, cols] -> [B, cols, C] -> [B, cols, rows] -> [B, rows, cols]
    return transpose(fc_(transpose(x, 1, 2)), 1, 2);
  }

  Tensor<T> sample_noise(std::size_t batch, Rng &rng) const {
    return nn::randn<T>({ batch, 1, cfg_.noise_dim() }, rng);
  }

  nn::ParamList<T> parameters() const {
    nn::ParamList<T> p;
    for (std::size_t i = 0; i < convs_.size(); ++i)
      convs_[i].collect(p, "gen.conv" + std::to_string(i));
    fc_.collect(p, "gen.fc");
    return p;
  }

private:
  GanConfig cfg_;
  std::vector<nn::Conv1d<T>> convs_;
  nn::Linear<T> fc_;
};

/// Critic: embedding [B, rows, cols] read as cols channels over rows,
/// strided conv1d stack, flatten, linear -> [B].
template <class T>
class Discriminator {
public:
  Discriminator() = default;
  Discriminator(const GanConfig &cfg, Rng &rng): cfg_(cfg) {
    std::size_t cin = cfg.cols, len = cfg.rows;
    const std::size_t pad = cfg.disc_kernel / 2;
    for (std::size_t c: cfg.disc_channels) {
      convs_.emplace_back(cin, c, cfg.disc_kernel, cfg.disc_stride, pad, rng);
      len = (len + 2 * pad - cfg.disc_kernel) / cfg.disc_stride + 1;
      cin = c;
    }
    flat_ = cin * len;
    fc_ = nn::Linear<T>(flat_, 1, rng);
  }

  Tensor<T> operator()(const Tensor<T> &emb) const {
    const std::size_t B = emb.dim(0);
    Tensor<T> x = transpose(emb, 1, 2);
    for (const nn::Conv1d<T> &conv: convs_)
      x = leaky_relu(conv(x), static_cast<T>(cfg_.leaky_slope));
    return reshape(fc_(reshape(x, { B, flat_ })), { B });
  }

  nn::ParamList<T> parameters() const {
    nn::ParamList<T> p;
    for (std::size_t i = 0; i < convs_.size(); ++i)
      convs_[i].collect(p, "disc.conv" + std::to_string(i));
    fc_.collect(p, "disc.fc");
    return p;
  }

private:
  GanConfig cfg_;
  std::vector<nn::Conv1d<T>> convs_;
  nn::Linear<T> fc_;
  std::size_t flat_ = 0;
};

template <class T>
struct RangeGan {
  GanConfig cfg;
  Generator<T> gen;
  Discriminator<T> disc;

  RangeGan() = default;
  RangeGan(GanConfig c, std::uint64_t seed): cfg(std::move(c)) {
    cfg.validate();
    Rng rng = nn::derive_rng(seed, 0x67616e);
    gen = Generator<T>(cfg, rng);
    disc = Discriminator<T>(cfg, rng);
  }

  void save(nn::Checkpoint &ck) const {
    ck.put_params(gen.parameters());
    ck.put_params(disc.parameters());
  }
  void load(const nn::Checkpoint &ck) {
    ck.get_params(gen.parameters());
    ck.get_params(disc.parameters());
  }
};

// ---------------------------------------------------------------------------
// Training

/// Scalar property per embedding: [B, rows, cols] -> [B], differentiable.
template <class T>
using PropertyHead = std::function<Tensor<T>(const Tensor<T> &)>;

struct GanStep {
  std::size_t step = 0;
  double wasserstein_estimate = 0;  // mean critic(real) - mean critic(fake)
  double range_loss = 0;
  double compliance_rate = 0;
  double validity_rate = std::numeric_limits<double>::quiet_NaN();
  double max_abs_critic_weight = 0;  // largest after any critic step so far
};

struct GanTrainOptions {
  std::uint64_t seed = 0;
  /// Optional validity probe over a generated batch, called every
  /// `probe_every` steps.
  std::function<double(const Tensor<float> &)> validity_probe;
  std::size_t probe_every = 0;
  std::function<void(const GanStep &)> on_step;
};

/// Alternating weight-clipped critic updates and range-loss generator
/// updates. `real` holds [rows, cols] embeddings. Throws kEmptyDataset.
template <class T>
std::vector<GanStep> train_gan(RangeGan<T> &gan, const std::vector<Tensor<T>> &real,
                               const PropertyHead<T> &head, const RangeSpec &spec,
                               const GanTrainOptions &opt = {}) {
  if (real.empty())
    throw Error(ErrorKind::kEmptyDataset, "no real embeddings");
  spec.validate();
  const GanConfig &cfg = gan.cfg;
  for (const Tensor<T> &r: real) {
    if (r.rank() != 2 || r.dim(0) != cfg.rows || r.dim(1) != cfg.cols)
      nn::shape_error("train_gan", r.shape(), { cfg.rows, cfg.cols });
  }
  const std::vector<Tensor<T>> gen_params = nn::tensors_of(gan.gen.parameters());
  const std::vector<Tensor<T>> disc_params = nn::tensors_of(gan.disc.parameters());
  nn::Optimizer<T> gen_opt(gen_params, cfg.gen_optim);
  nn::Optimizer<T> disc_opt(disc_params, cfg.disc_optim);
  const T bound = static_cast<T>(cfg.clip);
  nn::clip_weights(disc_params, bound);

  Rng rng = nn::derive_rng(opt.seed, 0x7467616e);
  std::uniform_int_distribution<std::size_t> pick(0, real.size() - 1);
  const std::size_t B = cfg.batch_size;
  auto set_tracking = [](const std::vector<Tensor<T>> &ps, bool on) {
    for (Tensor<T> p: ps)
      p.set_requires_grad(on);
  };

  std::vector<GanStep> history;
  T max_w = nn::max_abs(disc_params);
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    GanStep rec;
    rec.step = step;
    for (std::size_t c = 0; c < cfg.critic_steps; ++c) {
      std::vector<std::size_t> idx(B);
      for (std::size_t &i: idx)
        i = pick(rng);
      Tensor<T> real_batch = stack_rows(real, idx);
      Tensor<T> fake;
      {
        nn::NoGradGuard guard;
        fake = gan.gen(gan.gen.sample_noise(B, rng));
      }
      Tensor<T> d_real = gan.disc(real_batch);
      Tensor<T> d_fake = gan.disc(fake);
      Tensor<T> loss = discriminator_objective(d_real, d_fake);
      disc_opt.zero_grad();
      loss.backward();
      disc_opt.step();
      nn::clip_weights(disc_params, bound);
      max_w = std::max(max_w, nn::max_abs(disc_params));
      rec.wasserstein_estimate = -static_cast<double>(loss.item());
    }

    set_tracking(disc_params, false);
    Tensor<T> fake = gan.gen(gan.gen.sample_noise(B, rng));
    Tensor<T> y = head(fake);
    Tensor<T> loss = generator_objective(gan.disc(fake), y, spec);
    gen_opt.zero_grad();
    loss.backward();
    gen_opt.step();
    set_tracking(disc_params, true);

    std::vector<double> ys(y.data().begin(), y.data().end());
    rec.range_loss = range_loss(std::span<const double>(ys), spec);
    std::size_t inside = 0;
    for (double v: ys)
      inside += is_compliant(v, spec) ? 1 : 0;
    rec.compliance_rate = static_cast<double>(inside) / static_cast<double>(ys.size());
    rec.max_abs_critic_weight = static_cast<double>(max_w);
    if constexpr (std::is_same_v<T, float>) {
      if (opt.validity_probe && opt.probe_every > 0 && step % opt.probe_every == 0)
        rec.validity_rate = opt.validity_probe(fake.detach());
    }
    history.push_back(rec);
    if (opt.on_step)
      opt.on_step(rec);
  }
  return history;
}

inline void write_gan_history_csv(std::ostream &os, const std::vector<GanStep> &h) {
  os << "step,wasserstein_estimate,range_loss,compliance_rate,validity_rate\n";
  for (const GanStep &s: h) {
    os << s.step << ',' << s.wasserstein_estimate << ',' << s.range_loss << ','
       << s.compliance_rate << ',';
    if (!std::isnan(s.validity_rate))
      os << s.validity_rate;
    os << '\n';
  }
}

/// n generated embeddings [rows, cols] from a seeded noise stream.
template <class T>
std::vector<Tensor<T>> generate_embeddings(const Generator<T> &gen, std::size_t n,
                                           std::uint64_t seed,
                                           std::size_t batch_size = 32) {
  nn::NoGradGuard guard;
  Rng rng = nn::derive_rng(seed, 0x67656e);
  std::vector<Tensor<T>> out;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t B = std::min(batch_size, n - start);
    Tensor<T> batch = gen(gen.sample_noise(B, rng));
    const std::size_t rows = batch.dim(1), cols = batch.dim(2);
    for (std::size_t b = 0; b < B; ++b) {
      std::vector<T> v(batch.data().begin() + static_cast<std::ptrdiff_t>(b * rows * cols),
                       batch.data().begin() + static_cast<std::ptrdiff_t>((b + 1) * rows * cols));
      out.push_back(Tensor<T>::from({ rows, cols }, std::move(v)));
    }
  }
  return out;
}

struct GeneratedMolecule {
  std::string smiles;
  double score = 0;
  bool valid = false;
  std::string canonical;  // empty when invalid
};

/// Noise -> embeddings -> greedy decode -> validation. Invalid strings are
/// kept and flagged.
template <class T>
std::vector<GeneratedMolecule> generate(std::size_t n, const Generator<T> &gen,
                                        Embedder<T> &decoder, const Vocabulary &vocab,
                                        const std::function<double(const Tensor<T> &)> &score,
                                        std::uint64_t seed) {
  std::vector<GeneratedMolecule> out;
  for (const Tensor<T> &emb: generate_embeddings(gen, n, seed)) {
    GeneratedMolecule g;
    const TargetSequence seq = decoder.greedy_decode(emb);
    g.smiles = detokenize(seq.tokens, vocab).smiles;
    g.score = score(emb);
    if (auto c = chem::canonicalize(g.smiles)) {
      g.valid = true;
      g.canonical = *c;
    }
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace molrange::models
