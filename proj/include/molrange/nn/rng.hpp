//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "molrange/nn/tensor.hpp"

namespace molrange::nn {

using Rng = std::mt19937_64;

template <class T>
Tensor<T> randn(Shape shape, Rng &rng, T stddev = T(1),
                bool requires_grad = false) {
  std::normal_distribution<double> dist(0.0, static_cast<double>(stddev));
  std::vector<T> v(numel(shape));
  for (T &x: v)
    x = static_cast<T>(dist(rng));
  return Tensor<T>::from(std::move(shape), std::move(v), requires_grad);
}

template <class T>
Tensor<T> uniform(Shape shape, Rng &rng, T lo, T hi, bool requires_grad = false) {
  std::uniform_real_distribution<double> dist(static_cast<double>(lo),
                                              static_cast<double>(hi));
  std::vector<T> v(numel(shape));
  for (T &x: v)
    x = static_cast<T>(dist(rng));
  return Tensor<T>::from(std::move(shape), std::move(v), requires_grad);
}

/// Glorot-uniform weights for a layer with the given fan-in and fan-out.
template <class T>
Tensor<T> glorot(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng &rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return uniform<T>(std::move(shape), rng, static_cast<T>(-a), static_cast<T>(a),
                    true);
}

/// Derives an independent stream from a base seed and a tag.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq { static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag),
                      static_cast<std::uint32_t>(tag >> 32) };
  return Rng(seq);
}

}  // namespace molrange::nn
