//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "molrange/nn/layers.hpp"

namespace molrange::nn {

enum class OptimizerKind { kSgd, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// p -= lr * g. Throws kShapeMismatch on length mismatch.
template <class T>
void sgd_update(std::span<T> p, std::span<const T> g, double lr) {
  if (p.size() != g.size())
    shape_error("sgd_update", { p.size() }, { g.size() });
  for (std::size_t i = 0; i < p.size(); ++i)
    p[i] -= static_cast<T>(lr) * g[i];
}

/// One bias-corrected Adam step; `step` is the 1-based step number.
template <class T>
void adam_update(std::span<T> p, std::span<const T> g, std::span<T> m,
                 std::span<T> v, std::uint64_t step, const OptimizerConfig &cfg) {
  if (p.size() != g.size() || m.size() != p.size() || v.size() != p.size())
    shape_error("adam_update", { p.size() }, { g.size() });
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = b1 * m[i] + (T(1) - b1) * g[i];
    v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
    const double mhat = static_cast<double>(m[i]) / c1;
    const double vhat = static_cast<double>(v[i]) / c2;
    p[i] -= static_cast<T>(cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps));
  }
}

/// Owns moment buffers for a fixed parameter list. Parameters without a
/// gradient buffer are skipped.
template <class T>
class Optimizer {
public:
  Optimizer() = default;
  Optimizer(std::vector<Tensor<T>> params, OptimizerConfig cfg)
      : params_(std::move(params)), cfg_(cfg) {
    if (cfg_.kind == OptimizerKind::kAdam) {
      for (const Tensor<T> &p: params_) {
        m_.emplace_back(p.numel(), T(0));
        v_.emplace_back(p.numel(), T(0));
      }
    }
  }

  void step() {
    ++step_;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Tensor<T> &p = params_[i];
      if (!p.has_grad())
        continue;
      if (cfg_.kind == OptimizerKind::kSgd)
        sgd_update<T>(p.data(), p.grad(), cfg_.lr);
      else
        adam_update<T>(p.data(), p.grad(), m_[i], v_[i], step_, cfg_);
    }
  }

  void zero_grad() {
    for (Tensor<T> &p: params_)
      p.zero_grad();
  }

  const OptimizerConfig &config() const { return cfg_; }
  std::uint64_t steps() const { return step_; }
  const std::vector<Tensor<T>> &params() const { return params_; }
  std::vector<std::vector<T>> &first_moments() { return m_; }
  std::vector<std::vector<T>> &second_moments() { return v_; }
  void set_steps(std::uint64_t s) { step_ = s; }

private:
  std::vector<Tensor<T>> params_;
  OptimizerConfig cfg_;
  std::vector<std::vector<T>> m_, v_;
  std::uint64_t step_ = 0;
};

/// Clamps every entry to [-bound, bound].
template <class T>
void clip_weights(const std::vector<Tensor<T>> &params, T bound) {
  if (!(bound > T(0)))
    throw Error(ErrorKind::kInvalidArgument, "clip bound must be positive");
  for (Tensor<T> p: params)
    for (T &x: p.data())
      x = std::clamp(x, -bound, bound);
}

template <class T>
T max_abs(const std::vector<Tensor<T>> &params) {
  T m = 0;
  for (const Tensor<T> &p: params)
    for (T x: p.data())
      m = std::max(m, std::abs(x));
  return m;
}

}  // namespace molrange::nn
