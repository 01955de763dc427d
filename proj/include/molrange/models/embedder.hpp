//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "molrange/encoding.hpp"
#include "molrange/nn/checkpoint.hpp"
#include "molrange/nn/layers.hpp"
#include "molrange/nn/optim.hpp"

namespace molrange::models {

using nn::Rng;
using nn::Shape;
using nn::Tensor;

enum class NormKind { kLayer, kBatch };

struct EmbedderConfig {
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t model_dim = 64;
  std::size_t ff_dim = 256;
  double dropout = 0.0;
  std::size_t src_len = kDefaultSourceLength;
  std::size_t tgt_len = kDefaultTargetLength;
  std::size_t src_vocab = 0;
  std::size_t tgt_vocab = 0;
  NormKind norm = NormKind::kLayer;
  nn::OptimizerConfig optim { nn::OptimizerKind::kAdam, 1e-3, 0.9, 0.99, 1e-8 };

  static EmbedderConfig desk();
  static EmbedderConfig paper();

  /// Throws kConfigInvalid naming the offending field.
  void validate() const;
};

inline EmbedderConfig EmbedderConfig::desk() { return {}; }

inline EmbedderConfig EmbedderConfig::paper() {
  EmbedderConfig c;
  c.layers = 6;
  c.heads = 8;
  c.model_dim = 512;
  c.ff_dim = 2048;
  c.dropout = 0.1;
  c.norm = NormKind::kBatch;
  c.optim = { nn::OptimizerKind::kAdam, 1e-4, 0.1, 0.99, 1e-8 };
  return c;
}

inline void EmbedderConfig::validate() const {
  auto fail = [](const std::string &key, const std::string &why) {
    throw Error(ErrorKind::kConfigInvalid, "embedder." + key + ": " + why);
  };
  if (layers == 0)
    fail("layers", "must be positive");
  if (heads == 0 || model_dim % heads != 0)
    fail("heads", "model_dim must be divisible by heads");
  if (ff_dim == 0)
    fail("ff_dim", "must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0))
    fail("dropout", "must lie in [0, 1)");
  if (src_len == 0 || tgt_len < 2)
    fail("tgt_len", "sequence lengths too small");
}

/// Normalization slot that is either a layer norm or a feature-axis batch
/// norm over [B, L, D].
template <class T>
struct Norm {
  NormKind kind = NormKind::kLayer;
  nn::LayerNorm<T> ln;
  nn::BatchNorm<T> bn;

  Norm() = default;
  Norm(NormKind k, std::size_t d): kind(k) {
    if (k == NormKind::kLayer)
      ln = nn::LayerNorm<T>(d);
    else
      bn = nn::BatchNorm<T>(d, -1);
  }

  Tensor<T> operator()(const Tensor<T> &x, bool training) {
    return kind == NormKind::kLayer ? ln(x) : bn(x, training);
  }

  void collect(nn::ParamList<T> &out, const std::string &prefix) const {
    if (kind == NormKind::kLayer)
      ln.collect(out, prefix);
    else
      bn.collect(out, prefix);
  }
  void collect_buffers(nn::ParamList<T> &out, const std::string &prefix) const {
    if (kind == NormKind::kBatch)
      bn.collect_buffers(out, prefix);
  }
};

template <class T>
struct EncoderLayer {
  Norm<T> n1, n2;
  nn::MultiHeadAttention<T> attn;
  nn::FeedForward<T> ff;
};

template <class T>
struct DecoderLayer {
  Norm<T> n1, n2, n3;
  nn::MultiHeadAttention<T> self_attn, cross_attn;
  nn::FeedForward<T> ff;
};

/// Memory rows the decoder attends over, plus an additive key bias
/// [B, 1, 1, Lm] (undefined when every row is attended plainly).
template <class T>
struct Memory {
  Tensor<T> values;  // [B, Lm, D]
  Tensor<T> bias;
};

inline constexpr double kMaskedScore = -1e9;

/// Pre-norm transformer: encoder over source tokens producing an
/// L_src x model_dim matrix per molecule (zero rows at PAD positions), and
/// a causal decoder over SMILES tokens cross-attending to that matrix.
template <class T>
class Embedder {
public:
  Embedder() = default;
  Embedder(EmbedderConfig cfg, std::uint64_t seed): cfg_(std::move(cfg)) {
    cfg_.validate();
    if (cfg_.src_vocab == 0 || cfg_.tgt_vocab == 0)
      throw Error(ErrorKind::kConfigInvalid, "embedder vocab sizes not set");
    Rng rng = nn::derive_rng(seed, 0x656d62);
    const std::size_t D = cfg_.model_dim;
    src_embed_ = nn::Embedding<T>(cfg_.src_vocab, D, rng);
    tgt_embed_ = nn::Embedding<T>(cfg_.tgt_vocab, D, rng);
    for (std::size_t i = 0; i < cfg_.layers; ++i) {
      EncoderLayer<T> e;
      e.n1 = Norm<T>(cfg_.norm, D);
      e.n2 = Norm<T>(cfg_.norm, D);
      e.attn = nn::MultiHeadAttention<T>(D, cfg_.heads, rng);
      e.ff = nn::FeedForward<T>(D, cfg_.ff_dim, rng);
      enc_.push_back(std::move(e));
    }
    for (std::size_t i = 0; i < cfg_.layers; ++i) {
      DecoderLayer<T> d;
      d.n1 = Norm<T>(cfg_.norm, D);
      d.n2 = Norm<T>(cfg_.norm, D);
      d.n3 = Norm<T>(cfg_.norm, D);
      d.self_attn = nn::MultiHeadAttention<T>(D, cfg_.heads, rng);
      d.cross_attn = nn::MultiHeadAttention<T>(D, cfg_.heads, rng);
      d.ff = nn::FeedForward<T>(D, cfg_.ff_dim, rng);
      dec_.push_back(std::move(d));
    }
    enc_norm_ = Norm<T>(cfg_.norm, D);
    dec_norm_ = Norm<T>(cfg_.norm, D);
    out_ = nn::Linear<T>(D, cfg_.tgt_vocab, rng);
    positions_ = nn::sinusoidal_positions<T>(std::max(cfg_.src_len, cfg_.tgt_len), D);
    dropout_rng_ = nn::derive_rng(seed, 0x64726f70);
  }

  const EmbedderConfig &config() const { return cfg_; }

  nn::ParamList<T> parameters() const {
    nn::ParamList<T> p;
    src_embed_.collect(p, "src_embed");
    tgt_embed_.collect(p, "tgt_embed");
    for (std::size_t i = 0; i < enc_.size(); ++i) {
      const std::string s = "enc" + std::to_string(i);
      enc_[i].n1.collect(p, s + ".n1");
      enc_[i].n2.collect(p, s + ".n2");
      enc_[i].attn.collect(p, s + ".attn");
      enc_[i].ff.collect(p, s + ".ff");
    }
    for (std::size_t i = 0; i < dec_.size(); ++i) {
      const std::string s = "dec" + std::to_string(i);
      dec_[i].n1.collect(p, s + ".n1");
      dec_[i].n2.collect(p, s + ".n2");
      dec_[i].n3.collect(p, s + ".n3");
      dec_[i].self_attn.collect(p, s + ".self");
      dec_[i].cross_attn.collect(p, s + ".cross");
      dec_[i].ff.collect(p, s + ".ff");
    }
    enc_norm_.collect(p, "enc_norm");
    dec_norm_.collect(p, "dec_norm");
    out_.collect(p, "out");
    return p;
  }

  nn::ParamList<T> buffers() const {
    nn::ParamList<T> b;
    for (std::size_t i = 0; i < enc_.size(); ++i) {
      const std::string s = "enc" + std::to_string(i);
      enc_[i].n1.collect_buffers(b, s + ".n1");
      enc_[i].n2.collect_buffers(b, s + ".n2");
    }
    for (std::size_t i = 0; i < dec_.size(); ++i) {
      const std::string s = "dec" + std::to_string(i);
      dec_[i].n1.collect_buffers(b, s + ".n1");
      dec_[i].n2.collect_buffers(b, s + ".n2");
      dec_[i].n3.collect_buffers(b, s + ".n3");
    }
    enc_norm_.collect_buffers(b, "enc_norm");
    dec_norm_.collect_buffers(b, "dec_norm");
    return b;
  }

  /// Encodes a batch trimmed to its longest content. Returns [B, Ls, D]
  /// with rows at PAD positions set to zero; `lengths` receives the
  /// content length of each source.
  Tensor<T> encode_batch(const std::vector<const SourceSequence *> &srcs,
                         bool training, std::vector<std::size_t> &lengths) {
    const std::size_t B = srcs.size();
    lengths.assign(B, 0);
    std::size_t Ls = 1;
    for (std::size_t b = 0; b < B; ++b) {
      if (srcs[b]->tokens.size() != cfg_.src_len)
        nn::shape_error("encode", { srcs[b]->tokens.size() }, { cfg_.src_len });
      lengths[b] = static_cast<std::size_t>(std::max(1, srcs[b]->content_length()));
      Ls = std::max(Ls, lengths[b]);
    }
    std::vector<int> ids(B * Ls, kPadId);
    std::vector<T> key_bias(B * Ls, T(0)), row_mask(B * Ls, T(0));
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t t = 0; t < Ls; ++t) {
        ids[b * Ls + t] = srcs[b]->tokens[t];
        const bool real = t < lengths[b];
        key_bias[b * Ls + t] = real ? T(0) : static_cast<T>(kMaskedScore);
        row_mask[b * Ls + t] = real ? T(1) : T(0);
      }
    }
    Tensor<T> bias = Tensor<T>::from({ B, 1, 1, Ls }, std::move(key_bias));
    Tensor<T> x = embed(src_embed_, ids, B, Ls);
    for (EncoderLayer<T> &layer: enc_) {
      Tensor<T> h = layer.n1(x, training);
      x = add(x, drop(layer.attn(h, h, bias), training));
      x = add(x, drop(layer.ff(layer.n2(x, training)), training));
    }
    x = enc_norm_(x, training);
    return mul(x, Tensor<T>::from({ B, Ls, 1 }, std::move(row_mask)));
  }

  /// One molecule in eval mode: [src_len, D], PAD rows zero.
  Tensor<T> encode(const SourceSequence &src) {
    nn::NoGradGuard guard;
    std::vector<std::size_t> lengths;
    Tensor<T> e = encode_batch({ &src }, false, lengths);
    return pad_rows(reshape(e, { e.dim(1), e.dim(2) }), cfg_.src_len);
  }

  /// Pads [L, D] with zero rows to [n, D].
  static Tensor<T> pad_rows(const Tensor<T> &x, std::size_t n) {
    if (x.dim(0) == n)
      return x;
    return nn::concat<T>({ x, Tensor<T>::zeros({ n - x.dim(0), x.dim(1) }) }, 0);
  }

  /// Compact memory for trimmed encoder output whose rows at and beyond
  /// each length are zero. The src_len - len identical PAD rows of the full
  /// matrix are folded into one zero row carrying a log(count) bias, which
  /// is exactly equivalent to attending over all src_len rows.
  Memory<T> compact_memory(const Tensor<T> &enc,
                           const std::vector<std::size_t> &lengths) const {
    const std::size_t B = enc.dim(0), Ls = enc.dim(1), D = enc.dim(2);
    Tensor<T> values = enc;
    std::size_t Lm = Ls;
    if (Ls < cfg_.src_len) {
      values = nn::concat<T>({ enc, Tensor<T>::zeros({ B, 1, D }) }, 1);
      Lm = Ls + 1;
    }
    std::vector<T> bias(B * Lm, T(0));
    for (std::size_t b = 0; b < B; ++b) {
      const std::size_t len = lengths[b];
      for (std::size_t t = len; t < Lm; ++t) {
        bias[b * Lm + t] =
            t == len ? static_cast<T>(std::log(static_cast<double>(cfg_.src_len - len)))
                     : static_cast<T>(kMaskedScore);
      }
    }
    return { values, Tensor<T>::from({ B, 1, 1, Lm }, std::move(bias)) };
  }

  /// Plain memory over every row of full matrices [B, src_len, D].
  Memory<T> full_memory(const Tensor<T> &emb) const {
    if (emb.rank() != 3 || emb.dim(1) != cfg_.src_len || emb.dim(2) != cfg_.model_dim)
      nn::shape_error("decode", emb.shape(), { 0, cfg_.src_len, cfg_.model_dim });
    return { emb, Tensor<T>() };
  }

  /// Teacher-forced logits [B, Lt, V] for decoder inputs `ids` (B x Lt).
  Tensor<T> decode_train(const Memory<T> &mem, const std::vector<int> &ids,
                         std::size_t batch, bool training) {
    const std::size_t Lt = ids.size() / batch;
    std::vector<T> causal(Lt * Lt, T(0));
    for (std::size_t i = 0; i < Lt; ++i)
      for (std::size_t j = i + 1; j < Lt; ++j)
        causal[i * Lt + j] = static_cast<T>(kMaskedScore);
    Tensor<T> causal_bias = Tensor<T>::from({ 1, 1, Lt, Lt }, std::move(causal));
    Tensor<T> x = embed(tgt_embed_, ids, batch, Lt);
    for (DecoderLayer<T> &layer: dec_) {
      Tensor<T> h = layer.n1(x, training);
      x = add(x, drop(layer.self_attn(h, h, causal_bias), training));
      h = layer.n2(x, training);
      x = add(x, drop(layer.cross_attn(h, mem.values, mem.bias), training));
      x = add(x, drop(layer.ff(layer.n3(x, training)), training));
    }
    return out_(dec_norm_(x, training));
  }

  /// Autoregressive argmax from BOS until EOS or tgt_len, one sequence per
  /// memory row block. Eval mode, no graph.
  std::vector<TargetSequence> greedy_decode(const Memory<T> &mem) {
    nn::NoGradGuard guard;
    const std::size_t B = mem.values.dim(0), D = cfg_.model_dim;
    std::vector<TargetSequence> out(B);
    for (TargetSequence &s: out) {
      s.tokens.assign(cfg_.tgt_len, kPadId);
      s.tokens[0] = kBosId;
    }
    std::vector<bool> done(B, false);
    // Cross-attention keys and values are fixed per layer.
    std::vector<Tensor<T>> ck, cv, sk, sv;
    for (DecoderLayer<T> &layer: dec_) {
      ck.push_back(layer.cross_attn.split_heads(layer.cross_attn.wk(mem.values)));
      cv.push_back(layer.cross_attn.split_heads(layer.cross_attn.wv(mem.values)));
    }
    sk.resize(dec_.size());
    sv.resize(dec_.size());
    for (std::size_t t = 0; t + 1 < cfg_.tgt_len; ++t) {
      std::vector<int> ids(B);
      for (std::size_t b = 0; b < B; ++b)
        ids[b] = out[b].tokens[t];
      Tensor<T> x = embedding(tgt_embed_.weight, std::span<const int>(ids));
      x = reshape(x, { B, 1, D });
      x = mul_scalar(x, static_cast<T>(std::sqrt(static_cast<double>(D))));
      x = add(x, slice(positions_, 0, t, t + 1));
      for (std::size_t l = 0; l < dec_.size(); ++l) {
        DecoderLayer<T> &layer = dec_[l];
        Tensor<T> h = layer.n1(x, false);
        Tensor<T> q = layer.self_attn.split_heads(layer.self_attn.wq(h));
        Tensor<T> k = layer.self_attn.split_heads(layer.self_attn.wk(h));
        Tensor<T> v = layer.self_attn.split_heads(layer.self_attn.wv(h));
        sk[l] = t == 0 ? k : nn::concat<T>({ sk[l], k }, 2);
        sv[l] = t == 0 ? v : nn::concat<T>({ sv[l], v }, 2);
        Tensor<T> a = matmul(layer.self_attn.weights(q, sk[l], Tensor<T>()), sv[l]);
        x = add(x, layer.self_attn.wo(layer.self_attn.merge_heads(a)));
        h = layer.n2(x, false);
        q = layer.cross_attn.split_heads(layer.cross_attn.wq(h));
        a = matmul(layer.cross_attn.weights(q, ck[l], mem.bias), cv[l]);
        x = add(x, layer.cross_attn.wo(layer.cross_attn.merge_heads(a)));
        x = add(x, layer.ff(layer.n3(x, false)));
      }
      Tensor<T> logits = out_(dec_norm_(x, false));  // [B, 1, V]
      const std::size_t V = cfg_.tgt_vocab;
      bool all_done = true;
      for (std::size_t b = 0; b < B; ++b) {
        if (done[b])
          continue;
        const T *row = logits.data().data() + b * V;
        const int next = static_cast<int>(std::max_element(row, row + V) - row);
        out[b].tokens[t + 1] = next;
        if (next == kEosId)
          done[b] = true;
        all_done = all_done && done[b];
      }
      if (all_done)
        break;
    }
    return out;
  }

  /// Greedy decode of one full embedding matrix [src_len, D].
  TargetSequence greedy_decode(const Tensor<T> &emb) {
    Tensor<T> batched = reshape(emb.detach(), { 1, emb.dim(0), emb.dim(1) });
    return greedy_decode(full_memory(batched)).front();
  }

  void save(nn::Checkpoint &ck) const {
    ck.put_params(parameters());
    ck.put_params(buffers());
  }
  void load(const nn::Checkpoint &ck) {
    ck.get_params(parameters());
    ck.get_params(buffers());
  }

  Rng &dropout_rng() { return dropout_rng_; }

private:
  Tensor<T> embed(const nn::Embedding<T> &table, const std::vector<int> &ids,
                  std::size_t B, std::size_t L) {
    Tensor<T> x = table(ids, B);
    x = mul_scalar(x, static_cast<T>(std::sqrt(static_cast<double>(cfg_.model_dim))));
    return add(x, slice(positions_, 0, 0, L));
  }

  Tensor<T> drop(const Tensor<T> &x, bool training) {
    return nn::dropout(x, cfg_.dropout, training, dropout_rng_);
  }

  EmbedderConfig cfg_;
  nn::Embedding<T> src_embed_, tgt_embed_;
  std::vector<EncoderLayer<T>> enc_;
  std::vector<DecoderLayer<T>> dec_;
  Norm<T> enc_norm_, dec_norm_;
  nn::Linear<T> out_;
  Tensor<T> positions_;
  Rng dropout_rng_;
};

// ---------------------------------------------------------------------------
// Training

struct EmbedderEpoch {
  std::size_t epoch = 0;
  double train_nll = 0;
  double val_nll = 0;  // NaN without a validation set
  double exact_match = 0;  // teacher-forced argmax on the training set
};

struct EmbedderTrainOptions {
  std::size_t epochs = 300;
  std::size_t batch_size = 16;
  /// Stop once the training exact-match rate reaches this value (> 1
  /// disables early stopping).
  double stop_at_exact_match = 2.0;
  std::uint64_t seed = 0;
  std::function<void(const EmbedderEpoch &)> on_epoch;
};

/// Decoder inputs and labels for a batch, trimmed to the longest target.
struct TargetBatch {
  std::vector<int> inputs;  // B x Lt, starts with BOS
  std::vector<int> labels;  // B x Lt, PAD where ignored
  std::size_t length = 0;
};

inline TargetBatch make_target_batch(const std::vector<const TargetSequence *> &tgts) {
  TargetBatch tb;
  std::size_t Lt = 1;
  for (const TargetSequence *t: tgts) {
    std::size_t n = 0;
    while (n < t->tokens.size() && t->tokens[n] != kPadId)
      ++n;
    Lt = std::max(Lt, n > 0 ? n - 1 : 1);
  }
  tb.length = Lt;
  for (const TargetSequence *t: tgts) {
    for (std::size_t i = 0; i < Lt; ++i) {
      tb.inputs.push_back(i < t->tokens.size() ? t->tokens[i] : kPadId);
      tb.labels.push_back(i + 1 < t->tokens.size() ? t->tokens[i + 1] : kPadId);
    }
  }
  return tb;
}

/// Per-sequence exact match of argmax logits against labels (PAD ignored).
template <class T>
std::size_t count_exact(const Tensor<T> &logits, const TargetBatch &tb,
                        std::size_t batch) {
  const std::size_t Lt = tb.length, V = logits.dim(-1);
  std::size_t exact = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    bool ok = true;
    for (std::size_t t = 0; t < Lt && ok; ++t) {
      const int label = tb.labels[b * Lt + t];
      if (label == kPadId)
        continue;
      const T *row = logits.data().data() + (b * Lt + t) * V;
      ok = static_cast<int>(std::max_element(row, row + V) - row) == label;
    }
    exact += ok ? 1 : 0;
  }
  return exact;
}

struct BatchEval {
  double nll_sum = 0;  // summed token NLL
  std::size_t tokens = 0;
  std::size_t exact = 0;
};

/// Eval-mode teacher-forced pass over a dataset.
template <class T>
BatchEval evaluate_embedder(Embedder<T> &model, const TokenDataset &data,
                            std::size_t batch_size) {
  nn::NoGradGuard guard;
  BatchEval ev;
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t end = std::min(data.size(), start + batch_size);
    std::vector<const SourceSequence *> srcs;
    std::vector<const TargetSequence *> tgts;
    for (std::size_t i = start; i < end; ++i) {
      srcs.push_back(&data.sources[i]);
      tgts.push_back(&data.targets[i]);
    }
    const std::size_t B = end - start;
    std::vector<std::size_t> lengths;
    Tensor<T> enc = model.encode_batch(srcs, false, lengths);
    TargetBatch tb = make_target_batch(tgts);
    Tensor<T> logits = model.decode_train(model.compact_memory(enc, lengths),
                                          tb.inputs, B, false);
    Tensor<T> flat = reshape(logits, { B * tb.length, logits.dim(-1) });
    std::size_t n = 0;
    for (int l: tb.labels)
      n += l != kPadId ? 1 : 0;
    ev.nll_sum += static_cast<double>(cross_entropy(flat, tb.labels, kPadId).item())
                  * static_cast<double>(n);
    ev.tokens += n;
    ev.exact += count_exact(logits, tb, B);
  }
  return ev;
}

/// Minibatch training of encoder and decoder on token NLL. Throws
/// kEmptyDataset.
template <class T>
std::vector<EmbedderEpoch> train_embedder(Embedder<T> &model,
                                          const TokenDataset &train,
                                          const TokenDataset *val,
                                          const EmbedderTrainOptions &opt,
                                          nn::Optimizer<T> *optimizer = nullptr) {
  if (train.size() == 0)
    throw Error(ErrorKind::kEmptyDataset, "embedder training set is empty");
  nn::Optimizer<T> local(nn::tensors_of(model.parameters()), model.config().optim);
  nn::Optimizer<T> &optim = optimizer ? *optimizer : local;
  Rng rng = nn::derive_rng(opt.seed, 0x747261696e);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<EmbedderEpoch> history;
  for (std::size_t epoch = 1; epoch <= opt.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double nll_sum = 0;
    std::size_t tokens = 0;
    for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
      const std::size_t end = std::min(order.size(), start + opt.batch_size);
      std::vector<const SourceSequence *> srcs;
      std::vector<const TargetSequence *> tgts;
      for (std::size_t i = start; i < end; ++i) {
        srcs.push_back(&train.sources[order[i]]);
        tgts.push_back(&train.targets[order[i]]);
      }
      const std::size_t B = end - start;
      std::vector<std::size_t> lengths;
      Tensor<T> enc = model.encode_batch(srcs, true, lengths);
      TargetBatch tb = make_target_batch(tgts);
      Tensor<T> logits = model.decode_train(model.compact_memory(enc, lengths),
                                            tb.inputs, B, true);
      Tensor<T> loss = cross_entropy(
          reshape(logits, { B * tb.length, logits.dim(-1) }), tb.labels, kPadId);
      optim.zero_grad();
      loss.backward();
      optim.step();
      std::size_t n = 0;
      for (int l: tb.labels)
        n += l != kPadId ? 1 : 0;
      nll_sum += static_cast<double>(loss.item()) * static_cast<double>(n);
      tokens += n;
    }
    EmbedderEpoch rec;
    rec.epoch = epoch;
    rec.train_nll = nll_sum / static_cast<double>(std::max<std::size_t>(tokens, 1));
    const BatchEval tr = evaluate_embedder(model, train, 32);
    rec.exact_match = static_cast<double>(tr.exact) / static_cast<double>(train.size());
    rec.val_nll = std::numeric_limits<double>::quiet_NaN();
    if (val != nullptr && val->size() > 0) {
      const BatchEval ev = evaluate_embedder(model, *val, 32);
      rec.val_nll = ev.nll_sum / static_cast<double>(std::max<std::size_t>(ev.tokens, 1));
    }
    history.push_back(rec);
    if (opt.on_epoch)
      opt.on_epoch(rec);
    if (rec.exact_match >= opt.stop_at_exact_match)
      break;
  }
  return history;
}

inline void write_history_csv(std::ostream &os,
                              const std::vector<EmbedderEpoch> &history) {
  os << "epoch,train_nll,val_nll,exact_match\n";
  for (const EmbedderEpoch &e: history)
    os << e.epoch << ',' << e.train_nll << ',' << e.val_nll << ','
       << e.exact_match << '\n';
}

}  // namespace molrange::models
