//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "support/op_cases.hpp"

#include <algorithm>

#include "molrange/nn/layers.hpp"

namespace molrange::testing {
namespace {

using namespace molrange::nn;
using T = Tensor<double>;
using Inputs = std::vector<T>;

using T = Tensor<double>;
using Inputs = std::vector<T>;

T rnd(Shape s, Rng &rng, double scale = 1.0) {
  return randn<double>(std::move(s), rng, scale);
}

T positive(Shape s, Rng &rng) {
  return uniform<double>(std::move(s), rng, 0.5, 2.0);
}

// Values spread at least 0.05 apart so max and the relu kink stay put under
// finite differences.
T spread(Shape s, Rng &rng) {
  const std::size_t n = numel(s);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = 0.1 * (static_cast<double>(i) - static_cast<double>(n) / 2.0) + 0.025;
  std::shuffle(v.begin(), v.end(), rng);
  return T::from(std::move(s), std::move(v));
}

}  // namespace

std::vector<OpCase> op_cases() {
  std::vector<OpCase> c;
  c.push_back({ "add_broadcast",
                [](Rng &r) { return Inputs { rnd({ 2, 3, 4 }, r), rnd({ 3, 1 }, r) }; },
                [](const Inputs &x) { return add(x[0], x[1]); } });
  c.push_back({ "sub_broadcast",
                [](Rng &r) { return Inputs { rnd({ 4 }, r), rnd({ 3, 4 }, r) }; },
                [](const Inputs &x) { return x[0] - x[1]; } });
  c.push_back({ "mul_broadcast",
                [](Rng &r) { return Inputs { rnd({ 2, 1, 4 }, r), rnd({ 1, 3, 4 }, r) }; },
                [](const Inputs &x) { return x[0] * x[1]; } });
  c.push_back({ "div",
                [](Rng &r) { return Inputs { rnd({ 3, 4 }, r), positive({ 4 }, r) }; },
                [](const Inputs &x) { return x[0] / x[1]; } });
  c.push_back({ "scalar_ops",
                [](Rng &r) { return Inputs { rnd({ 5 }, r) }; },
                [](const Inputs &x) { return -(x[0] * 3.0 + 2.0); } });
  c.push_back({ "exp", [](Rng &r) { return Inputs { rnd({ 6 }, r) }; },
                [](const Inputs &x) { return exp(x[0]); } });
  c.push_back({ "log", [](Rng &r) { return Inputs { positive({ 6 }, r) }; },
                [](const Inputs &x) { return log(x[0]); } });
  c.push_back({ "sigmoid", [](Rng &r) { return Inputs { rnd({ 6 }, r, 3.0) }; },
                [](const Inputs &x) { return sigmoid(x[0]); } });
  c.push_back({ "tanh", [](Rng &r) { return Inputs { rnd({ 6 }, r) }; },
                [](const Inputs &x) { return tanh(x[0]); } });
  c.push_back({ "relu", [](Rng &r) { return Inputs { spread({ 8 }, r) }; },
                [](const Inputs &x) { return relu(x[0]); } });
  c.push_back({ "leaky_relu", [](Rng &r) { return Inputs { spread({ 8 }, r) }; },
                [](const Inputs &x) { return leaky_relu(x[0], 0.2); } });
  c.push_back({ "softplus", [](Rng &r) { return Inputs { rnd({ 6 }, r, 5.0) }; },
                [](const Inputs &x) { return softplus(x[0]); } });
  c.push_back({ "square_sqrt", [](Rng &r) { return Inputs { positive({ 6 }, r) }; },
                [](const Inputs &x) { return sqrt(x[0]) + square(x[0]); } });
  c.push_back({ "sum_mean_all", [](Rng &r) { return Inputs { rnd({ 3, 4 }, r) }; },
                [](const Inputs &x) { return sum(x[0]) * mean(x[0]); } });
  c.push_back({ "sum_axis", [](Rng &r) { return Inputs { rnd({ 2, 3, 4 }, r) }; },
                [](const Inputs &x) { return sum(x[0], 1); } });
  c.push_back({ "mean_axis_keepdim", [](Rng &r) { return Inputs { rnd({ 2, 3, 4 }, r) }; },
                [](const Inputs &x) { return mean(x[0], -1, true) * x[0]; } });
  c.push_back({ "max_axis", [](Rng &r) { return Inputs { spread({ 3, 5 }, r) }; },
                [](const Inputs &x) { return max(x[0], 1); } });
  c.push_back({ "max_all", [](Rng &r) { return Inputs { spread({ 3, 5 }, r) }; },
                [](const Inputs &x) { return max(x[0]) * 2.0; } });
  c.push_back({ "reshape_transpose", [](Rng &r) { return Inputs { rnd({ 2, 3, 4 }, r) }; },
                [](const Inputs &x) { return transpose(reshape(x[0], { 6, 4 }), 0, 1); } });
  c.push_back({ "transpose_3d", [](Rng &r) { return Inputs { rnd({ 2, 3, 4 }, r) }; },
                [](const Inputs &x) { return transpose(x[0], 0, 2); } });
  c.push_back({ "concat", [](Rng &r) { return Inputs { rnd({ 2, 3 }, r), rnd({ 2, 2 }, r) }; },
                [](const Inputs &x) { return concat<double>({ x[0], x[1], x[0] }, 1); } });
  c.push_back({ "slice", [](Rng &r) { return Inputs { rnd({ 3, 6 }, r) }; },
                [](const Inputs &x) { return slice(x[0], 1, 2, 5); } });
  c.push_back({ "matmul_2d", [](Rng &r) { return Inputs { rnd({ 3, 4 }, r), rnd({ 4, 5 }, r) }; },
                [](const Inputs &x) { return matmul(x[0], x[1]); } });
  c.push_back({ "matmul_shared_right",
                [](Rng &r) { return Inputs { rnd({ 2, 3, 4 }, r), rnd({ 4, 2 }, r) }; },
                [](const Inputs &x) { return matmul(x[0], x[1]); } });
  c.push_back({ "matmul_batched",
                [](Rng &r) { return Inputs { rnd({ 2, 2, 3, 4 }, r), rnd({ 2, 2, 4, 3 }, r) }; },
                [](const Inputs &x) { return matmul(x[0], x[1]); } });
  c.push_back({ "matmul_nt",
                [](Rng &r) { return Inputs { rnd({ 2, 3, 4 }, r), rnd({ 2, 5, 4 }, r) }; },
                [](const Inputs &x) { return matmul_nt(x[0], x[1]); } });
  c.push_back({ "softmax", [](Rng &r) { return Inputs { rnd({ 3, 5 }, r, 2.0) }; },
                [](const Inputs &x) { return softmax(x[0], -1); } });
  c.push_back({ "softmax_axis0", [](Rng &r) { return Inputs { rnd({ 4, 3 }, r, 2.0) }; },
                [](const Inputs &x) { return softmax(x[0], 0); } });
  c.push_back({ "log_softmax", [](Rng &r) { return Inputs { rnd({ 3, 5 }, r, 2.0) }; },
                [](const Inputs &x) { return log_softmax(x[0], -1); } });
  c.push_back({ "layer_norm",
                [](Rng &r) { return Inputs { rnd({ 2, 3, 6 }, r), rnd({ 6 }, r), rnd({ 6 }, r) }; },
                [](const Inputs &x) { return layer_norm(x[0], x[1], x[2]); } });
  c.push_back({ "batch_norm_train",
                [](Rng &r) { return Inputs { rnd({ 4, 3, 5 }, r), rnd({ 3 }, r), rnd({ 3 }, r) }; },
                [](const Inputs &x) {
                  T rm = T::zeros({ 3 }), rv = T::full({ 3 }, 1.0);
                  return batch_norm(x[0], x[1], x[2], rm, rv, true, 1);
                } });
  c.push_back({ "batch_norm_last_axis",
                [](Rng &r) { return Inputs { rnd({ 3, 4, 2 }, r), rnd({ 2 }, r), rnd({ 2 }, r) }; },
                [](const Inputs &x) {
                  T rm = T::zeros({ 2 }), rv = T::full({ 2 }, 1.0);
                  return batch_norm(x[0], x[1], x[2], rm, rv, true, -1);
                } });
  c.push_back({ "batch_norm_eval",
                [](Rng &r) { return Inputs { rnd({ 4, 3 }, r), rnd({ 3 }, r), rnd({ 3 }, r) }; },
                [](const Inputs &x) {
                  T rm = T::full({ 3 }, 0.3), rv = T::full({ 3 }, 2.0);
                  return batch_norm(x[0], x[1], x[2], rm, rv, false, 1);
                } });
  c.push_back({ "dropout", [](Rng &r) { return Inputs { rnd({ 4, 5 }, r) }; },
                [](const Inputs &x) {
                  Rng fixed(5);
                  return dropout(x[0], 0.3, true, fixed);
                } });
  c.push_back({ "embedding", [](Rng &r) { return Inputs { rnd({ 5, 3 }, r) }; },
                [](const Inputs &x) {
                  const std::vector<int> ids { 4, 0, 4, 2 };
                  return embedding(x[0], std::span<const int>(ids));
                } });
  c.push_back({ "conv2d",
                [](Rng &r) {
                  return Inputs { rnd({ 2, 2, 5, 4 }, r), rnd({ 3, 2, 3, 3 }, r), rnd({ 3 }, r) };
                },
                [](const Inputs &x) { return conv2d(x[0], x[1], x[2], 2, 1); } });
  c.push_back({ "conv2d_no_bias",
                [](Rng &r) { return Inputs { rnd({ 1, 1, 4, 4 }, r), rnd({ 2, 1, 2, 2 }, r) }; },
                [](const Inputs &x) { return conv2d(x[0], x[1], T {}, 1, 0); } });
  c.push_back({ "conv1d",
                [](Rng &r) {
                  return Inputs { rnd({ 2, 3, 7 }, r), rnd({ 2, 3, 3 }, r), rnd({ 2 }, r) };
                },
                [](const Inputs &x) { return conv1d(x[0], x[1], x[2], 1, 1); } });
  c.push_back({ "conv1d_stride2",
                [](Rng &r) {
                  return Inputs { rnd({ 2, 2, 8 }, r), rnd({ 3, 2, 3 }, r), rnd({ 3 }, r) };
                },
                [](const Inputs &x) { return conv1d(x[0], x[1], x[2], 2, 1); } });
  c.push_back({ "cross_entropy", [](Rng &r) { return Inputs { rnd({ 4, 5 }, r, 2.0) }; },
                [](const Inputs &x) {
                  const std::vector<int> t { 1, -1, 4, 0 };
                  return cross_entropy(x[0], std::span<const int>(t), -1);
                } });
  c.push_back({ "bce_with_logits", [](Rng &r) { return Inputs { rnd({ 5 }, r, 3.0) }; },
                [](const Inputs &x) {
                  const std::vector<double> y { 1, 0, 1, 1, 0 };
                  const std::vector<double> w { 0.5, 2.0, 1.0, 0.5, 2.0 };
                  return bce_with_logits(x[0], std::span<const double>(y),
                                         std::span<const double>(w));
                } });
  c.push_back({ "attention",
                [](Rng &r) { return Inputs { rnd({ 2, 3, 8 }, r), rnd({ 2, 4, 8 }, r) }; },
                [](const Inputs &x) {
                  Rng init(3);
                  MultiHeadAttention<double> mha(8, 2, init);
                  T bias = T::from({ 2, 1, 1, 4 }, { 0, 0, 0, -1e9, 0, 0, 0.7, 0 });
                  return mha(x[0], x[1], bias);
                } });
  c.push_back({ "composite_mlp",
                [](Rng &r) { return Inputs { rnd({ 4, 3 }, r), rnd({ 3, 6 }, r), rnd({ 6, 2 }, r) }; },
                [](const Inputs &x) {
                  return log_softmax(matmul(tanh(matmul(x[0], x[1])), x[2]), -1);
                } });
  return c;
}

}  // namespace molrange::testing
