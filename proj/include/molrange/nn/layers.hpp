//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "molrange/nn/ops.hpp"
#include "molrange/nn/rng.hpp"

namespace molrange::nn {

template <class T>
struct NamedParam {
  std::string name;
  Tensor<T> tensor;
};

template <class T>
using ParamList = std::vector<NamedParam<T>>;

template <class T>
std::vector<Tensor<T>> tensors_of(const ParamList<T> &params) {
  std::vector<Tensor<T>> out;
  out.reserve(params.size());
  for (const NamedParam<T> &p: params)
    out.push_back(p.tensor);
  return out;
}

/// y = x W + b over the last axis. W is [in, out].
template <class T>
struct Linear {
  Tensor<T> weight, bias;

  Linear() = default;
  Linear(std::size_t in, std::size_t out, Rng &rng, bool with_bias = true)
      : weight(glorot<T>({ in, out }, in, out, rng)) {
    if (with_bias)
      bias = Tensor<T>::zeros({ out }, true);
  }

  Tensor<T> operator()(const Tensor<T> &x) const {
    Tensor<T> y = matmul(x, weight);
    return bias.defined() ? add(y, bias) : y;
  }

  void collect(ParamList<T> &out, const std::string &prefix) const {
    out.push_back({ prefix + ".weight", weight });
    if (bias.defined())
      out.push_back({ prefix + ".bias", bias });
  }
};

template <class T>
struct LayerNorm {
  Tensor<T> gamma, beta;

  LayerNorm() = default;
  explicit LayerNorm(std::size_t d)
      : gamma(Tensor<T>::full({ d }, T(1), true)),
        beta(Tensor<T>::zeros({ d }, true)) { }

  Tensor<T> operator()(const Tensor<T> &x) const {
    return layer_norm(x, gamma, beta);
  }

  void collect(ParamList<T> &out, const std::string &prefix) const {
    out.push_back({ prefix + ".gamma", gamma });
    out.push_back({ prefix + ".beta", beta });
  }
};

/// Running statistics are buffers: saved with the parameters but never
/// touched by the optimizer.
template <class T>
struct BatchNorm {
  Tensor<T> gamma, beta, running_mean, running_var;
  int channel_axis = 1;

  BatchNorm() = default;
  BatchNorm(std::size_t c, int axis)
      : gamma(Tensor<T>::full({ c }, T(1), true)),
        beta(Tensor<T>::zeros({ c }, true)),
        running_mean(Tensor<T>::zeros({ c })),
        running_var(Tensor<T>::full({ c }, T(1))),
        channel_axis(axis) { }

  Tensor<T> operator()(const Tensor<T> &x, bool training) {
    return batch_norm(x, gamma, beta, running_mean, running_var, training,
                      channel_axis);
  }

  void collect(ParamList<T> &out, const std::string &prefix) const {
    out.push_back({ prefix + ".gamma", gamma });
    out.push_back({ prefix + ".beta", beta });
  }
  void collect_buffers(ParamList<T> &out, const std::string &prefix) const {
    out.push_back({ prefix + ".running_mean", running_mean });
    out.push_back({ prefix + ".running_var", running_var });
  }
};

template <class T>
struct Embedding {
  Tensor<T> weight;

  Embedding() = default;
  Embedding(std::size_t vocab, std::size_t dim, Rng &rng)
      : weight(randn<T>({ vocab, dim }, rng,
                        static_cast<T>(1.0 / std::sqrt(static_cast<double>(dim))),
                        true)) { }

  /// ids of length B*L -> [B, L, D].
  Tensor<T> operator()(std::span<const int> ids, std::size_t batch) const {
    Tensor<T> e = embedding(weight, ids);
    return reshape(e, { batch, ids.size() / batch, weight.dim(1) });
  }

  void collect(ParamList<T> &out, const std::string &prefix) const {
    out.push_back({ prefix + ".weight", weight });
  }
};

template <class T>
struct Conv1d {
  Tensor<T> weight, bias;
  std::size_t stride = 1, padding = 0;

  Conv1d() = default;
  Conv1d(std::size_t cin, std::size_t cout, std::size_t kernel,
         std::size_t stride_, std::size_t padding_, Rng &rng)
      : weight(glorot<T>({ cout, cin, kernel }, cin * kernel, cout * kernel, rng)),
        bias(Tensor<T>::zeros({ cout }, true)),
        stride(stride_),
        padding(padding_) { }

  Tensor<T> operator()(const Tensor<T> &x) const {
    return conv1d(x, weight, bias, stride, padding);
  }

  void collect(ParamList<T> &out, const std::string &prefix) const {
    out.push_back({ prefix + ".weight", weight });
    out.push_back({ prefix + ".bias", bias });
  }
};

template <class T>
struct Conv2d {
  Tensor<T> weight, bias;
  std::size_t stride = 1, padding = 0;

  Conv2d() = default;
  Conv2d(std::size_t cin, std::size_t cout, std::size_t kernel,
         std::size_t stride_, std::size_t padding_, Rng &rng)
      : weight(glorot<T>({ cout, cin, kernel, kernel }, cin * kernel * kernel,
                         cout * kernel * kernel, rng)),
        bias(Tensor<T>::zeros({ cout }, true)),
        stride(stride_),
        padding(padding_) { }

  Tensor<T> operator()(const Tensor<T> &x) const {
    return conv2d(x, weight, bias, stride, padding);
  }

  void collect(ParamList<T> &out, const std::string &prefix) const {
    out.push_back({ prefix + ".weight", weight });
    out.push_back({ prefix + ".bias", bias });
  }
};

/// Scaled dot-product attention with `heads` heads. `bias` is added to the
/// [B, H, Lq, Lk] scores (broadcast), typically 0 or a large negative value
/// for masked keys.
template <class T>
struct MultiHeadAttention {
  Linear<T> wq, wk, wv, wo;
  std::size_t heads = 1;

  MultiHeadAttention() = default;
  MultiHeadAttention(std::size_t dim, std::size_t heads_, Rng &rng)
      : wq(dim, dim, rng), wk(dim, dim, rng), wv(dim, dim, rng),
        wo(dim, dim, rng), heads(heads_) {
    if (heads == 0 || dim % heads != 0)
      throw Error(ErrorKind::kConfigInvalid,
                  "model_dim " + std::to_string(dim)
                      + " not divisible by heads " + std::to_string(heads));
  }

  // [B, L, D] -> [B, H, L, D/H]
  Tensor<T> split_heads(const Tensor<T> &x) const {
    const std::size_t B = x.dim(0), L = x.dim(1), D = x.dim(2);
    return transpose(reshape(x, { B, L, heads, D / heads }), 1, 2);
  }

  Tensor<T> merge_heads(const Tensor<T> &x) const {
    const std::size_t B = x.dim(0), L = x.dim(2), dh = x.dim(3);
    return reshape(transpose(x, 1, 2), { B, L, heads * dh });
  }

  /// Attention weights [B, H, Lq, Lk].
  Tensor<T> weights(const Tensor<T> &q, const Tensor<T> &k,
                    const Tensor<T> &bias) const {
    const std::size_t dh = q.dim(-1);
    Tensor<T> scores = mul_scalar(matmul_nt(q, k),
                                  T(1) / static_cast<T>(std::sqrt(static_cast<double>(dh))));
    if (bias.defined())
      scores = add(scores, bias);
    return softmax(scores, -1);
  }

  Tensor<T> operator()(const Tensor<T> &query, const Tensor<T> &memory,
                       const Tensor<T> &bias) const {
    Tensor<T> q = split_heads(wq(query));
    Tensor<T> k = split_heads(wk(memory));
    Tensor<T> v = split_heads(wv(memory));
    return wo(merge_heads(matmul(weights(q, k, bias), v)));
  }

  void collect(ParamList<T> &out, const std::string &prefix) const {
    wq.collect(out, prefix + ".q");
    wk.collect(out, prefix + ".k");
    wv.collect(out, prefix + ".v");
    wo.collect(out, prefix + ".o");
  }
};

template <class T>
struct FeedForward {
  Linear<T> fc1, fc2;

  FeedForward() = default;
  FeedForward(std::size_t dim, std::size_t hidden, Rng &rng)
      : fc1(dim, hidden, rng), fc2(hidden, dim, rng) { }

  Tensor<T> operator()(const Tensor<T> &x) const { return fc2(relu(fc1(x))); }

  void collect(ParamList<T> &out, const std::string &prefix) const {
    fc1.collect(out, prefix + ".fc1");
    fc2.collect(out, prefix + ".fc2");
  }
};

/// Fixed sinusoidal position table [length, dim].
template <class T>
Tensor<T> sinusoidal_positions(std::size_t length, std::size_t dim) {
  std::vector<T> v(length * dim);
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(i - i % 2)
                                                 / static_cast<double>(dim));
      const double angle = static_cast<double>(pos) * rate;
      v[pos * dim + i] = static_cast<T>(i % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  }
  return Tensor<T>::from({ length, dim }, std::move(v));
}

}  // namespace molrange::nn
