//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "molrange/nn/checkpoint.hpp"
#include "molrange/nn/layers.hpp"
#include "molrange/nn/optim.hpp"

namespace molrange::models {

using nn::Rng;
using nn::Tensor;

struct ClassifierConfig {
  std::size_t rows = 150;  // embedding rows (source length)
  std::size_t cols = 64;   // embedding width (model_dim)
  std::vector<std::size_t> channels { 8, 16, 32 };
  std::size_t kernel = 5;
  std::size_t stride = 2;
  std::size_t padding = 2;
  double dropout = 0.1;
  double leaky_slope = 0.2;
  nn::OptimizerConfig optim { nn::OptimizerKind::kAdam, 1e-3, 0.9, 0.99, 1e-8 };

  static ClassifierConfig desk() { return {}; }
  static ClassifierConfig paper() {
    ClassifierConfig c;
    c.rows = 150;
    c.cols = 512;
    c.channels = { 16, 32, 64, 128, 128, 128, 128 };
    c.dropout = 0.85;
    c.optim = { nn::OptimizerKind::kSgd, 1e-3, 0.9, 0.999, 1e-8 };
    return c;
  }

  /// Spatial size after every conv layer, starting with the input.
  std::vector<std::pair<std::size_t, std::size_t>> spatial_chain() const {
    std::vector<std::pair<std::size_t, std::size_t>> chain { { rows, cols } };
    for (std::size_t i = 0; i < channels.size(); ++i) {
      auto [h, w] = chain.back();
      chain.emplace_back((h + 2 * padding - kernel) / stride + 1,
                         (w + 2 * padding - kernel) / stride + 1);
    }
    return chain;
  }

  void validate() const {
    auto fail = [](const std::string &key, const std::string &why) {
      throw Error(ErrorKind::kConfigInvalid, "classifier." + key + ": " + why);
    };
    if (channels.empty())
      fail("channels", "at least one conv layer");
    if (kernel == 0 || stride == 0)
      fail("kernel", "kernel and stride must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0))
      fail("dropout", "must lie in [0, 1)");
    std::size_t h = rows, w = cols;
    for (std::size_t i = 0; i < channels.size(); ++i) {
      if (h + 2 * padding < kernel || w + 2 * padding < kernel)
        fail("channels", "too many layers for the input size");
      h = (h + 2 * padding - kernel) / stride + 1;
      w = (w + 2 * padding - kernel) / stride + 1;
    }
  }
};

/// Conv2d stack over an embedding seen as a one-channel image. Each block
/// is batch-norm, dropout, conv, leaky ReLU; a linear layer maps the
/// flattened map to one logit.
template <class T>
class Classifier {
public:
  Classifier() = default;
  Classifier(ClassifierConfig cfg, std::uint64_t seed): cfg_(std::move(cfg)) {
    cfg_.validate();
    Rng rng = nn::derive_rng(seed, 0x636c73);
    std::size_t cin = 1;
    for (std::size_t cout: cfg_.channels) {
      norms_.emplace_back(cin, 1);
      convs_.emplace_back(cin, cout, cfg_.kernel, cfg_.stride, cfg_.padding, rng);
      cin = cout;
    }
    const auto [h, w] = cfg_.spatial_chain().back();
    flat_ = cin * h * w;
    fc_ = nn::Linear<T>(flat_, 1, rng);
    dropout_rng_ = nn::derive_rng(seed, 0x64726f70);
  }

  const ClassifierConfig &config() const { return cfg_; }
  std::size_t flat_features() const { return flat_; }

  /// emb [B, rows, cols] -> logits [B].
  Tensor<T> logits(const Tensor<T> &emb, bool training) {
    if (emb.rank() != 3 || emb.dim(1) != cfg_.rows || emb.dim(2) != cfg_.cols)
      nn::shape_error("classify", emb.shape(), { 0, cfg_.rows, cfg_.cols });
    const std::size_t B = emb.dim(0);
    Tensor<T> x = reshape(emb, { B, 1, cfg_.rows, cfg_.cols });
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      x = norms_[i](x, training);
      x = nn::dropout(x, cfg_.dropout, training, dropout_rng_);
      x = leaky_relu(convs_[i](x), static_cast<T>(cfg_.leaky_slope));
    }
    x = reshape(x, { B, flat_ });
    return reshape(fc_(x), { B });
  }

  /// Sigmoid probabilities [B].
  Tensor<T> scores(const Tensor<T> &emb, bool training) {
    return sigmoid(logits(emb, training));
  }

  /// Eval-mode probability for one [rows, cols] embedding.
  double classify(const Tensor<T> &emb) {
    nn::NoGradGuard guard;
    Tensor<T> x = reshape(emb, { 1, emb.dim(0), emb.dim(1) });
    return static_cast<double>(scores(x, false).data()[0]);
  }

  nn::ParamList<T> parameters() const {
    nn::ParamList<T> p;
    for (std::size_t i = 0; i < convs_.size(); ++i) {
      norms_[i].collect(p, "block" + std::to_string(i) + ".norm");
      convs_[i].collect(p, "block" + std::to_string(i) + ".conv");
    }
    fc_.collect(p, "fc");
    return p;
  }

  nn::ParamList<T> buffers() const {
    nn::ParamList<T> b;
    for (std::size_t i = 0; i < norms_.size(); ++i)
      norms_[i].collect_buffers(b, "block" + std::to_string(i) + ".norm");
    return b;
  }

  /// Stops gradient tracking on all parameters.
  void freeze() {
    for (NamedParam p: parameters())
      p.tensor.set_requires_grad(false);
  }

  void save(nn::Checkpoint &ck) const {
    ck.put_params(parameters());
    ck.put_params(buffers());
  }
  void load(const nn::Checkpoint &ck) {
    ck.get_params(parameters());
    ck.get_params(buffers());
  }

private:
  using NamedParam = nn::NamedParam<T>;

  ClassifierConfig cfg_;
  std::vector<nn::BatchNorm<T>> norms_;
  std::vector<nn::Conv2d<T>> convs_;
  nn::Linear<T> fc_;
  std::size_t flat_ = 0;
  Rng dropout_rng_;
};

// ---------------------------------------------------------------------------
// Metrics and training

struct ClassificationMetrics {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;
  /// Set when a ratio had a zero denominator and was defined as 0.
  bool degenerate = false;
};

/// Predictions are probabilities thresholded at 0.5 (>= 0.5 is positive).
/// Throws kEmptyInput and kInvalidArgument on length mismatch or labels
/// outside {0, 1}.
ClassificationMetrics precision_recall_f1(std::span<const double> predictions,
                                          std::span<const int> labels);

/// Inverse-frequency class weights N / (2 N_c), indexed by label.
std::array<double, 2> inverse_frequency_weights(std::span<const int> labels);

struct ClassifierEpoch {
  std::size_t epoch = 0;
  double loss = 0;
  double train_accuracy = 0;
};

struct ClassifierTrainOptions {
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  bool weight_classes = true;
  std::uint64_t seed = 0;
  std::function<void(const ClassifierEpoch &)> on_epoch;
};

/// Stacks [rows, cols] embeddings selected by `idx` into [B, rows, cols].
template <class T>
Tensor<T> stack_rows(const std::vector<Tensor<T>> &items,
                     std::span<const std::size_t> idx) {
  const nn::Shape &s = items.at(idx.front()).shape();
  std::vector<T> v;
  v.reserve(idx.size() * nn::numel(s));
  for (std::size_t i: idx) {
    if (items[i].shape() != s)
      nn::shape_error("stack", s, items[i].shape());
    v.insert(v.end(), items[i].data().begin(), items[i].data().end());
  }
  nn::Shape shape { idx.size() };
  shape.insert(shape.end(), s.begin(), s.end());
  return Tensor<T>::from(std::move(shape), std::move(v));
}

template <class T>
std::vector<double> predict(Classifier<T> &model, const std::vector<Tensor<T>> &embs,
                            std::size_t batch_size = 32) {
  nn::NoGradGuard guard;
  std::vector<double> out;
  for (std::size_t start = 0; start < embs.size(); start += batch_size) {
    std::vector<std::size_t> idx;
    for (std::size_t i = start; i < std::min(embs.size(), start + batch_size); ++i)
      idx.push_back(i);
    Tensor<T> s = model.scores(stack_rows(embs, idx), false);
    for (T v: s.data())
      out.push_back(static_cast<double>(v));
  }
  return out;
}

/// Minibatch BCE training. Throws kEmptyDataset and kSingleClassDataset.
template <class T>
std::vector<ClassifierEpoch> train_classifier(Classifier<T> &model,
                                              const std::vector<Tensor<T>> &embs,
                                              const std::vector<int> &labels,
                                              const ClassifierTrainOptions &opt) {
  if (embs.empty())
    throw Error(ErrorKind::kEmptyDataset, "classifier training set is empty");
  if (embs.size() != labels.size())
    throw Error(ErrorKind::kInvalidArgument, "embeddings and labels differ in length");
  const std::size_t pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (pos == 0 || pos == labels.size())
    throw Error(ErrorKind::kSingleClassDataset,
                "training labels contain only class " + std::to_string(labels.front()));
  const std::array<double, 2> cw = opt.weight_classes
                                       ? inverse_frequency_weights(labels)
                                       : std::array<double, 2> { 1.0, 1.0 };
  nn::Optimizer<T> optim(nn::tensors_of(model.parameters()), model.config().optim);
  Rng rng = nn::derive_rng(opt.seed, 0x636c7472);
  std::vector<std::size_t> order(embs.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<ClassifierEpoch> history;
  for (std::size_t epoch = 1; epoch <= opt.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
      const std::size_t end = std::min(order.size(), start + opt.batch_size);
      std::span<const std::size_t> idx(order.data() + start, end - start);
      std::vector<T> y, w;
      for (std::size_t i: idx) {
        y.push_back(static_cast<T>(labels[i]));
        w.push_back(static_cast<T>(cw[labels[i]]));
      }
      Tensor<T> z = model.logits(stack_rows(embs, idx), true);
      Tensor<T> loss = bce_with_logits<T>(z, y, w);
      optim.zero_grad();
      loss.backward();
      optim.step();
      loss_sum += static_cast<double>(loss.item()) * static_cast<double>(idx.size());
      for (std::size_t k = 0; k < idx.size(); ++k)
        correct += ((z.data()[k] >= 0) == (labels[idx[k]] == 1)) ? 1 : 0;
    }
    ClassifierEpoch rec { epoch, loss_sum / static_cast<double>(embs.size()),
                          static_cast<double>(correct) / static_cast<double>(embs.size()) };
    history.push_back(rec);
    if (opt.on_epoch)
      opt.on_epoch(rec);
  }
  return history;
}

}  // namespace molrange::models
