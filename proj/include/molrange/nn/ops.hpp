//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "molrange/nn/gemm.hpp"
#include "molrange/nn/tensor.hpp"

namespace molrange::nn {

// ---------------------------------------------------------------------------
// Broadcasting elementwise binary ops

namespace detail {

struct Broadcast {
  Shape out;
  std::vector<std::size_t> sa, sb;  // element strides, 0 on broadcast dims
};

inline Broadcast plan_broadcast(const std::string &op, const Shape &a,
                                const Shape &b) {
  const std::size_t r = std::max(a.size(), b.size());
  Broadcast p;
  p.out.assign(r, 1);
  p.sa.assign(r, 0);
  p.sb.assign(r, 0);
  std::size_t stride_a = 1, stride_b = 1;
  for (std::size_t k = 0; k < r; ++k) {
    const std::size_t d = r - 1 - k;
    const std::size_t da = k < a.size() ? a[a.size() - 1 - k] : 1;
    const std::size_t db = k < b.size() ? b[b.size() - 1 - k] : 1;
    if (da != db && da != 1 && db != 1)
      shape_error(op, a, b);
    p.out[d] = std::max(da, db);
    p.sa[d] = da == 1 ? 0 : stride_a;
    p.sb[d] = db == 1 ? 0 : stride_b;
    stride_a *= da;
    stride_b *= db;
  }
  return p;
}

// Calls fn(out_index, a_index, b_index) for every output element.
template <class Fn>
void for_each_broadcast(const Broadcast &p, Fn &&fn) {
  const std::size_t r = p.out.size();
  if (r == 0) {
    fn(std::size_t { 0 }, std::size_t { 0 }, std::size_t { 0 });
    return;
  }
  const std::size_t inner = p.out[r - 1];
  const std::size_t ia_step = p.sa[r - 1], ib_step = p.sb[r - 1];
  const std::size_t total = numel(p.out);
  std::vector<std::size_t> idx(r, 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t o = 0; o < total; o += inner) {
    for (std::size_t j = 0; j < inner; ++j)
      fn(o + j, ia + j * ia_step, ib + j * ib_step);
    // advance the odometer over the outer dims
    for (std::size_t d = r - 1; d-- > 0;) {
      ++idx[d];
      ia += p.sa[d];
      ib += p.sb[d];
      if (idx[d] < p.out[d])
        break;
      ia -= p.sa[d] * idx[d];
      ib -= p.sb[d] * idx[d];
      idx[d] = 0;
    }
  }
}

template <class T, class F, class DA, class DB>
Tensor<T> binary_op(const std::string &name, const Tensor<T> &a,
                    const Tensor<T> &b, F f, DA dfa, DB dfb) {
  Broadcast p = plan_broadcast(name, a.shape(), b.shape());
  std::vector<T> out(numel(p.out));
  const T *av = a.data().data();
  const T *bv = b.data().data();
  if (a.shape() == b.shape()) {
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = f(av[i], bv[i]);
  } else {
    for_each_broadcast(p, [&](std::size_t o, std::size_t ia, std::size_t ib) {
      out[o] = f(av[ia], bv[ib]);
    });
  }
  return make_result<T>(
      p.out, std::move(out), { a, b },
      [p, dfa, dfb, same = a.shape() == b.shape()](Node<T> &self) {
        const T *g = self.grad.data();
        const T *av = self.parents[0]->value.data();
        const T *bv = self.parents[1]->value.data();
        const T *ov = self.value.data();
        std::vector<T> *ga = parent_grad(self, 0);
        std::vector<T> *gb = parent_grad(self, 1);
        auto body = [&](std::size_t o, std::size_t ia, std::size_t ib) {
          if (ga)
            (*ga)[ia] += g[o] * dfa(av[ia], bv[ib], ov[o]);
          if (gb)
            (*gb)[ib] += g[o] * dfb(av[ia], bv[ib], ov[o]);
        };
        if (same) {
          for (std::size_t i = 0; i < self.value.size(); ++i)
            body(i, i, i);
        } else {
          for_each_broadcast(p, body);
        }
      });
}

template <class T, class F, class D>
Tensor<T> unary_op(const Tensor<T> &x, F f, D df) {
  std::vector<T> out(x.numel());
  const T *xv = x.data().data();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = f(xv[i]);
  return make_result<T>(x.shape(), std::move(out), { x }, [df](Node<T> &self) {
    std::vector<T> *gx = parent_grad(self, 0);
    if (!gx)
      return;
    const T *xv = self.parents[0]->value.data();
    for (std::size_t i = 0; i < self.value.size(); ++i)
      (*gx)[i] += self.grad[i] * df(xv[i], self.value[i]);
  });
}

// View of a shape as [outer, n, inner] around `axis`.
struct AxisView {
  std::size_t outer = 1, n = 1, inner = 1;
};

inline AxisView axis_view(const Shape &s, std::size_t axis) {
  AxisView v;
  for (std::size_t d = 0; d < axis; ++d)
    v.outer *= s[d];
  v.n = s[axis];
  for (std::size_t d = axis + 1; d < s.size(); ++d)
    v.inner *= s[d];
  return v;
}

}  // namespace detail

template <class T>
Tensor<T> add(const Tensor<T> &a, const Tensor<T> &b) {
  return detail::binary_op<T>(
      "add", a, b, [](T x, T y) { return x + y; },
      [](T, T, T) { return T(1); }, [](T, T, T) { return T(1); });
}

template <class T>
Tensor<T> sub(const Tensor<T> &a, const Tensor<T> &b) {
  return detail::binary_op<T>(
      "sub", a, b, [](T x, T y) { return x - y; },
      [](T, T, T) { return T(1); }, [](T, T, T) { return T(-1); });
}

template <class T>
Tensor<T> mul(const Tensor<T> &a, const Tensor<T> &b) {
  return detail::binary_op<T>(
      "mul", a, b, [](T x, T y) { return x * y; },
      [](T, T y, T) { return y; }, [](T x, T, T) { return x; });
}

template <class T>
Tensor<T> div(const Tensor<T> &a, const Tensor<T> &b) {
  return detail::binary_op<T>(
      "div", a, b, [](T x, T y) { return x / y; },
      [](T, T y, T) { return T(1) / y; },
      [](T x, T y, T) { return -x / (y * y); });
}

template <class T>
Tensor<T> add_scalar(const Tensor<T> &x, T c) {
  return detail::unary_op(
      x, [c](T v) { return v + c; }, [](T, T) { return T(1); });
}

template <class T>
Tensor<T> mul_scalar(const Tensor<T> &x, T c) {
  return detail::unary_op(
      x, [c](T v) { return v * c; }, [c](T, T) { return c; });
}

template <class T>
Tensor<T> operator+(const Tensor<T> &a, const Tensor<T> &b) { return add(a, b); }
template <class T>
Tensor<T> operator-(const Tensor<T> &a, const Tensor<T> &b) { return sub(a, b); }
template <class T>
Tensor<T> operator*(const Tensor<T> &a, const Tensor<T> &b) { return mul(a, b); }
template <class T>
Tensor<T> operator/(const Tensor<T> &a, const Tensor<T> &b) { return div(a, b); }
template <class T>
Tensor<T> operator+(const Tensor<T> &a, T c) { return add_scalar(a, c); }
template <class T>
Tensor<T> operator-(const Tensor<T> &a, T c) { return add_scalar(a, -c); }
template <class T>
Tensor<T> operator*(const Tensor<T> &a, T c) { return mul_scalar(a, c); }
template <class T>
Tensor<T> operator*(T c, const Tensor<T> &a) { return mul_scalar(a, c); }
template <class T>
Tensor<T> operator-(const Tensor<T> &a) { return mul_scalar(a, T(-1)); }

// ---------------------------------------------------------------------------
// Unary ops

template <class T>
Tensor<T> exp(const Tensor<T> &x) {
  return detail::unary_op(
      x, [](T v) { return std::exp(v); }, [](T, T y) { return y; });
}

template <class T>
Tensor<T> log(const Tensor<T> &x) {
  return detail::unary_op(
      x, [](T v) { return std::log(v); }, [](T v, T) { return T(1) / v; });
}

template <class T>
T sigmoid_value(T v) {
  if (v >= 0)
    return T(1) / (T(1) + std::exp(-v));
  const T e = std::exp(v);
  return e / (T(1) + e);
}

template <class T>
T softplus_value(T v) {
  return std::max(v, T(0)) + std::log1p(std::exp(-std::abs(v)));
}

template <class T>
Tensor<T> sigmoid(const Tensor<T> &x) {
  return detail::unary_op(
      x, [](T v) { return sigmoid_value(v); },
      [](T, T y) { return y * (T(1) - y); });
}

template <class T>
Tensor<T> tanh(const Tensor<T> &x) {
  return detail::unary_op(
      x, [](T v) { return std::tanh(v); },
      [](T, T y) { return T(1) - y * y; });
}

template <class T>
Tensor<T> relu(const Tensor<T> &x) {
  return detail::unary_op(
      x, [](T v) { return v > 0 ? v : T(0); },
      [](T v, T) { return v > 0 ? T(1) : T(0); });
}

template <class T>
Tensor<T> leaky_relu(const Tensor<T> &x, T slope) {
  return detail::unary_op(
      x, [slope](T v) { return v > 0 ? v : slope * v; },
      [slope](T v, T) { return v > 0 ? T(1) : slope; });
}

/// log(1 + e^x), stable for large |x|.
template <class T>
Tensor<T> softplus(const Tensor<T> &x) {
  return detail::unary_op(
      x, [](T v) { return softplus_value(v); },
      [](T v, T) { return sigmoid_value(v); });
}

template <class T>
Tensor<T> square(const Tensor<T> &x) {
  return detail::unary_op(
      x, [](T v) { return v * v; }, [](T v, T) { return T(2) * v; });
}

template <class T>
Tensor<T> sqrt(const Tensor<T> &x) {
  return detail::unary_op(
      x, [](T v) { return std::sqrt(v); },
      [](T, T y) { return T(0.5) / y; });
}

// ---------------------------------------------------------------------------
// Reductions

template <class T>
Tensor<T> sum(const Tensor<T> &x) {
  T s = 0;
  for (T v: x.data())
    s += v;
  return make_result<T>({}, { s }, { x }, [](Node<T> &self) {
    std::vector<T> *gx = parent_grad(self, 0);
    if (!gx)
      return;
    for (T &g: *gx)
      g += self.grad[0];
  });
}

template <class T>
Tensor<T> mean(const Tensor<T> &x) {
  return mul_scalar(sum(x), T(1) / static_cast<T>(x.numel()));
}

/// Sum over one axis; the axis is kept with size 1 when keepdim.
template <class T>
Tensor<T> sum(const Tensor<T> &x, int axis, bool keepdim = false) {
  const std::size_t ax = x.normalize_axis(axis);
  const detail::AxisView v = detail::axis_view(x.shape(), ax);
  Shape out_shape = x.shape();
  if (keepdim)
    out_shape[ax] = 1;
  else
    out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(ax));
  std::vector<T> out(v.outer * v.inner, T(0));
  const T *xv = x.data().data();
  for (std::size_t o = 0; o < v.outer; ++o)
    for (std::size_t k = 0; k < v.n; ++k)
      for (std::size_t i = 0; i < v.inner; ++i)
        out[o * v.inner + i] += xv[(o * v.n + k) * v.inner + i];
  return make_result<T>(out_shape, std::move(out), { x }, [v](Node<T> &self) {
    std::vector<T> *gx = parent_grad(self, 0);
    if (!gx)
      return;
    for (std::size_t o = 0; o < v.outer; ++o)
      for (std::size_t k = 0; k < v.n; ++k)
        for (std::size_t i = 0; i < v.inner; ++i)
          (*gx)[(o * v.n + k) * v.inner + i] += self.grad[o * v.inner + i];
  });
}

template <class T>
Tensor<T> mean(const Tensor<T> &x, int axis, bool keepdim = false) {
  const T n = static_cast<T>(x.dim(axis));
  return mul_scalar(sum(x, axis, keepdim), T(1) / n);
}

/// Max over one axis; the gradient goes to the first maximal element.
template <class T>
Tensor<T> max(const Tensor<T> &x, int axis, bool keepdim = false) {
  const std::size_t ax = x.normalize_axis(axis);
  const detail::AxisView v = detail::axis_view(x.shape(), ax);
  Shape out_shape = x.shape();
  if (keepdim)
    out_shape[ax] = 1;
  else
    out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(ax));
  std::vector<T> out(v.outer * v.inner);
  std::vector<std::size_t> arg(v.outer * v.inner);
  const T *xv = x.data().data();
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t i = 0; i < v.inner; ++i) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < v.n; ++k) {
        if (xv[(o * v.n + k) * v.inner + i] > xv[(o * v.n + best) * v.inner + i])
          best = k;
      }
      out[o * v.inner + i] = xv[(o * v.n + best) * v.inner + i];
      arg[o * v.inner + i] = (o * v.n + best) * v.inner + i;
    }
  }
  return make_result<T>(out_shape, std::move(out), { x },
                        [arg = std::move(arg)](Node<T> &self) {
                          std::vector<T> *gx = parent_grad(self, 0);
                          if (!gx)
                            return;
                          for (std::size_t j = 0; j < arg.size(); ++j)
                            (*gx)[arg[j]] += self.grad[j];
                        });
}

template <class T>
Tensor<T> max(const Tensor<T> &x) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < x.numel(); ++i) {
    if (x.data()[i] > x.data()[best])
      best = i;
  }
  return make_result<T>({}, { x.data()[best] }, { x }, [best](Node<T> &self) {
    std::vector<T> *gx = parent_grad(self, 0);
    if (gx)
      (*gx)[best] += self.grad[0];
  });
}

// ---------------------------------------------------------------------------
// Shape ops

template <class T>
Tensor<T> reshape(const Tensor<T> &x, Shape shape) {
  if (numel(shape) != x.numel())
    shape_error("reshape", x.shape(), shape);
  std::vector<T> out(x.data().begin(), x.data().end());
  return make_result<T>(std::move(shape), std::move(out), { x },
                        [](Node<T> &self) {
                          std::vector<T> *gx = parent_grad(self, 0);
                          if (!gx)
                            return;
                          for (std::size_t i = 0; i < self.grad.size(); ++i)
                            (*gx)[i] += self.grad[i];
                        });
}

namespace detail {

// Copies x into y where y is x with axes d0 and d1 swapped. With
// accumulate, y += permuted x.
template <class T>
void swap_axes_copy(const Shape &xs, std::size_t d0, std::size_t d1,
                    const T *x, T *y, bool accumulate) {
  if (d0 > d1)
    std::swap(d0, d1);
  // x viewed as [A, n0, B, n1, C]
  std::size_t A = 1, B = 1, C = 1;
  for (std::size_t d = 0; d < d0; ++d)
    A *= xs[d];
  for (std::size_t d = d0 + 1; d < d1; ++d)
    B *= xs[d];
  for (std::size_t d = d1 + 1; d < xs.size(); ++d)
    C *= xs[d];
  const std::size_t n0 = xs[d0], n1 = xs[d1];
  for (std::size_t a = 0; a < A; ++a)
    for (std::size_t i0 = 0; i0 < n0; ++i0)
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t i1 = 0; i1 < n1; ++i1) {
          const T *src = x + ((((a * n0 + i0) * B + b) * n1 + i1) * C);
          T *dst = y + ((((a * n1 + i1) * B + b) * n0 + i0) * C);
          if (accumulate)
            for (std::size_t c = 0; c < C; ++c)
              dst[c] += src[c];
          else
            std::copy(src, src + C, dst);
        }
}

}  // namespace detail

template <class T>
Tensor<T> transpose(const Tensor<T> &x, int axis0, int axis1) {
  const std::size_t d0 = x.normalize_axis(axis0), d1 = x.normalize_axis(axis1);
  Shape out_shape = x.shape();
  std::swap(out_shape[d0], out_shape[d1]);
  std::vector<T> out(x.numel());
  detail::swap_axes_copy(x.shape(), d0, d1, x.data().data(), out.data(), false);
  return make_result<T>(out_shape, std::move(out), { x },
                        [d0, d1, out_shape](Node<T> &self) {
                          std::vector<T> *gx = parent_grad(self, 0);
                          if (!gx)
                            return;
                          detail::swap_axes_copy(out_shape, d0, d1,
                                                 self.grad.data(), gx->data(),
                                                 true);
                        });
}

template <class T>
Tensor<T> concat(const std::vector<Tensor<T>> &xs, int axis) {
  if (xs.empty())
    throw Error(ErrorKind::kInvalidArgument, "concat of nothing");
  const std::size_t ax = xs.front().normalize_axis(axis);
  Shape out_shape = xs.front().shape();
  out_shape[ax] = 0;
  for (const Tensor<T> &t: xs) {
    Shape a = t.shape(), b = xs.front().shape();
    if (a.size() != b.size())
      shape_error("concat", b, a);
    a[ax] = b[ax] = 0;
    if (a != b)
      shape_error("concat", xs.front().shape(), t.shape());
    out_shape[ax] += t.dim(static_cast<int>(ax));
  }
  const detail::AxisView ov = detail::axis_view(out_shape, ax);
  std::vector<T> out(numel(out_shape));
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const Tensor<T> &t: xs) {
    const std::size_t n = t.dim(static_cast<int>(ax));
    offsets.push_back(offset);
    for (std::size_t o = 0; o < ov.outer; ++o) {
      const T *src = t.data().data() + o * n * ov.inner;
      std::copy(src, src + n * ov.inner,
                out.begin() + static_cast<std::ptrdiff_t>((o * ov.n + offset) * ov.inner));
    }
    offset += n;
  }
  return make_result<T>(out_shape, std::move(out), xs,
                        [ov, offsets](Node<T> &self) {
                          for (std::size_t p = 0; p < self.parents.size(); ++p) {
                            std::vector<T> *gp = parent_grad(self, p);
                            if (!gp)
                              continue;
                            const std::size_t n = gp->size() / (ov.outer * ov.inner);
                            for (std::size_t o = 0; o < ov.outer; ++o)
                              for (std::size_t i = 0; i < n * ov.inner; ++i)
                                (*gp)[o * n * ov.inner + i] +=
                                    self.grad[(o * ov.n + offsets[p]) * ov.inner + i];
                          }
                        });
}

/// Elements [start, end) along `axis`.
template <class T>
Tensor<T> slice(const Tensor<T> &x, int axis, std::size_t start,
                std::size_t end) {
  const std::size_t ax = x.normalize_axis(axis);
  if (start > end || end > x.shape()[ax])
    throw Error(ErrorKind::kShapeMismatch,
                "slice [" + std::to_string(start) + ", " + std::to_string(end)
                    + ") of " + shape_str(x.shape()));
  const detail::AxisView v = detail::axis_view(x.shape(), ax);
  Shape out_shape = x.shape();
  out_shape[ax] = end - start;
  const std::size_t n = end - start;
  std::vector<T> out(numel(out_shape));
  for (std::size_t o = 0; o < v.outer; ++o) {
    const T *src = x.data().data() + (o * v.n + start) * v.inner;
    std::copy(src, src + n * v.inner,
              out.begin() + static_cast<std::ptrdiff_t>(o * n * v.inner));
  }
  return make_result<T>(out_shape, std::move(out), { x },
                        [v, start, n](Node<T> &self) {
                          std::vector<T> *gx = parent_grad(self, 0);
                          if (!gx)
                            return;
                          for (std::size_t o = 0; o < v.outer; ++o)
                            for (std::size_t i = 0; i < n * v.inner; ++i)
                              (*gx)[(o * v.n + start) * v.inner + i] +=
                                  self.grad[o * n * v.inner + i];
                        });
}

// ---------------------------------------------------------------------------
// Matrix products

/// a [..., m, k] x b [k, n] -> [..., m, n], or batched a [..., m, k] x
/// b [..., k, n] when both have the same leading dims.
template <class T>
Tensor<T> matmul(const Tensor<T> &a, const Tensor<T> &b) {
  if (a.rank() < 2 || b.rank() < 2)
    shape_error("matmul", a.shape(), b.shape());
  const std::size_t m = a.dim(-2), k = a.dim(-1);
  const std::size_t n = b.dim(-1);
  if (b.dim(-2) != k)
    shape_error("matmul", a.shape(), b.shape());

  Shape out_shape = a.shape();
  out_shape.back() = n;
  std::size_t batch = 1;
  bool shared_b = b.rank() == 2;
  if (!shared_b) {
    if (a.rank() != b.rank()
        || !std::equal(a.shape().begin(), a.shape().end() - 2, b.shape().begin()))
      shape_error("matmul", a.shape(), b.shape());
    batch = a.numel() / (m * k);
  }
  // A shared right operand folds all leading dims into the row count.
  const std::size_t rows = shared_b ? a.numel() / k : m;

  std::vector<T> out(numel(out_shape));
  for (std::size_t i = 0; i < batch; ++i)
    kernel::gemm(false, false, rows, n, k, a.data().data() + i * m * k,
                 b.data().data() + (shared_b ? 0 : i * k * n),
                 out.data() + i * rows * n, false);

  return make_result<T>(
      out_shape, std::move(out), { a, b },
      [batch, rows, n, k, m, shared_b](Node<T> &self) {
        std::vector<T> *ga = parent_grad(self, 0);
        std::vector<T> *gb = parent_grad(self, 1);
        const T *av = self.parents[0]->value.data();
        const T *bv = self.parents[1]->value.data();
        const T *g = self.grad.data();
        for (std::size_t i = 0; i < batch; ++i) {
          const std::size_t a_off = i * m * k;
          const std::size_t b_off = shared_b ? 0 : i * k * n;
          const std::size_t g_off = i * rows * n;
          if (ga)  // dA = dC B^T
            kernel::gemm(false, true, rows, k, n, g + g_off, bv + b_off,
                         ga->data() + a_off, true);
          if (gb)  // dB = A^T dC
            kernel::gemm(true, false, k, n, rows, av + a_off, g + g_off,
                         gb->data() + b_off, true);
        }
      });
}

/// a [..., m, k] x b[..., n, k]^T -> [..., m, n] with equal leading dims.
template <class T>
Tensor<T> matmul_nt(const Tensor<T> &a, const Tensor<T> &b) {
  if (a.rank() < 2 || a.rank() != b.rank() || a.dim(-1) != b.dim(-1)
      || !std::equal(a.shape().begin(), a.shape().end() - 2, b.shape().begin()))
    shape_error("matmul_nt", a.shape(), b.shape());
  const std::size_t m = a.dim(-2), k = a.dim(-1), n = b.dim(-2);
  const std::size_t batch = a.numel() / (m * k);
  Shape out_shape = a.shape();
  out_shape.back() = n;
  std::vector<T> out(numel(out_shape));
  for (std::size_t i = 0; i < batch; ++i)
    kernel::gemm(false, true, m, n, k, a.data().data() + i * m * k,
                 b.data().data() + i * n * k, out.data() + i * m * n, false);
  return make_result<T>(
      out_shape, std::move(out), { a, b }, [batch, m, n, k](Node<T> &self) {
        std::vector<T> *ga = parent_grad(self, 0);
        std::vector<T> *gb = parent_grad(self, 1);
        const T *av = self.parents[0]->value.data();
        const T *bv = self.parents[1]->value.data();
        const T *g = self.grad.data();
        for (std::size_t i = 0; i < batch; ++i) {
          if (ga)  // dA = dC B
            kernel::gemm(false, false, m, k, n, g + i * m * n, bv + i * n * k,
                         ga->data() + i * m * k, true);
          if (gb)  // dB = dC^T A
            kernel::gemm(true, false, n, k, m, g + i * m * n, av + i * m * k,
                         gb->data() + i * n * k, true);
        }
      });
}

// ---------------------------------------------------------------------------
// Normalizations and activations over an axis

template <class T>
Tensor<T> softmax(const Tensor<T> &x, int axis = -1) {
  const std::size_t ax = x.normalize_axis(axis);
  const detail::AxisView v = detail::axis_view(x.shape(), ax);
  std::vector<T> out(x.numel());
  const T *xv = x.data().data();
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t i = 0; i < v.inner; ++i) {
      const std::size_t base = o * v.n * v.inner + i;
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t k = 0; k < v.n; ++k)
        mx = std::max(mx, xv[base + k * v.inner]);
      T s = 0;
      for (std::size_t k = 0; k < v.n; ++k) {
        const T e = std::exp(xv[base + k * v.inner] - mx);
        out[base + k * v.inner] = e;
        s += e;
      }
      for (std::size_t k = 0; k < v.n; ++k)
        out[base + k * v.inner] /= s;
    }
  }
  return make_result<T>(x.shape(), std::move(out), { x }, [v](Node<T> &self) {
    std::vector<T> *gx = parent_grad(self, 0);
    if (!gx)
      return;
    const T *y = self.value.data();
    const T *g = self.grad.data();
    for (std::size_t o = 0; o < v.outer; ++o) {
      for (std::size_t i = 0; i < v.inner; ++i) {
        const std::size_t base = o * v.n * v.inner + i;
        T dot = 0;
        for (std::size_t k = 0; k < v.n; ++k)
          dot += g[base + k * v.inner] * y[base + k * v.inner];
        for (std::size_t k = 0; k < v.n; ++k) {
          const std::size_t j = base + k * v.inner;
          (*gx)[j] += y[j] * (g[j] - dot);
        }
      }
    }
  });
}

template <class T>
Tensor<T> log_softmax(const Tensor<T> &x, int axis = -1) {
  const std::size_t ax = x.normalize_axis(axis);
  const detail::AxisView v = detail::axis_view(x.shape(), ax);
  std::vector<T> out(x.numel());
  const T *xv = x.data().data();
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t i = 0; i < v.inner; ++i) {
      const std::size_t base = o * v.n * v.inner + i;
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t k = 0; k < v.n; ++k)
        mx = std::max(mx, xv[base + k * v.inner]);
      T s = 0;
      for (std::size_t k = 0; k < v.n; ++k)
        s += std::exp(xv[base + k * v.inner] - mx);
      const T lse = mx + std::log(s);
      for (std::size_t k = 0; k < v.n; ++k)
        out[base + k * v.inner] = xv[base + k * v.inner] - lse;
    }
  }
  return make_result<T>(x.shape(), std::move(out), { x }, [v](Node<T> &self) {
    std::vector<T> *gx = parent_grad(self, 0);
    if (!gx)
      return;
    const T *y = self.value.data();
    const T *g = self.grad.data();
    for (std::size_t o = 0; o < v.outer; ++o) {
      for (std::size_t i = 0; i < v.inner; ++i) {
        const std::size_t base = o * v.n * v.inner + i;
        T gs = 0;
        for (std::size_t k = 0; k < v.n; ++k)
          gs += g[base + k * v.inner];
        for (std::size_t k = 0; k < v.n; ++k) {
          const std::size_t j = base + k * v.inner;
          (*gx)[j] += g[j] - std::exp(y[j]) * gs;
        }
      }
    }
  });
}

/// Normalizes over the last axis, then scales by gamma and shifts by beta
/// (both shaped like the last axis).
template <class T>
Tensor<T> layer_norm(const Tensor<T> &x, const Tensor<T> &gamma,
                     const Tensor<T> &beta, T eps = T(1e-5)) {
  const std::size_t d = x.dim(-1);
  if (gamma.numel() != d || beta.numel() != d)
    shape_error("layer_norm", x.shape(), gamma.shape());
  const std::size_t rows = x.numel() / d;
  std::vector<T> out(x.numel()), xhat(x.numel()), rstd(rows);
  const T *xv = x.data().data();
  const T *gv = gamma.data().data();
  const T *bv = beta.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const T *row = xv + r * d;
    T mu = 0;
    for (std::size_t j = 0; j < d; ++j)
      mu += row[j];
    mu /= static_cast<T>(d);
    T var = 0;
    for (std::size_t j = 0; j < d; ++j)
      var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<T>(d);
    rstd[r] = T(1) / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      xhat[r * d + j] = (row[j] - mu) * rstd[r];
      out[r * d + j] = xhat[r * d + j] * gv[j] + bv[j];
    }
  }
  return make_result<T>(
      x.shape(), std::move(out), { x, gamma, beta },
      [d, rows, xhat = std::move(xhat), rstd = std::move(rstd)](Node<T> &self) {
        std::vector<T> *gx = parent_grad(self, 0);
        std::vector<T> *gg = parent_grad(self, 1);
        std::vector<T> *gb = parent_grad(self, 2);
        const T *gv = self.parents[1]->value.data();
        const T *g = self.grad.data();
        for (std::size_t r = 0; r < rows; ++r) {
          const T *gr = g + r * d;
          const T *xh = xhat.data() + r * d;
          if (gg)
            for (std::size_t j = 0; j < d; ++j)
              (*gg)[j] += gr[j] * xh[j];
          if (gb)
            for (std::size_t j = 0; j < d; ++j)
              (*gb)[j] += gr[j];
          if (gx) {
            T m1 = 0, m2 = 0;
            for (std::size_t j = 0; j < d; ++j) {
              const T dxh = gr[j] * gv[j];
              m1 += dxh;
              m2 += dxh * xh[j];
            }
            m1 /= static_cast<T>(d);
            m2 /= static_cast<T>(d);
            for (std::size_t j = 0; j < d; ++j)
              (*gx)[r * d + j] += rstd[r] * (gr[j] * gv[j] - m1 - xh[j] * m2);
          }
        }
      });
}

/// Batch normalization over `channel_axis`; statistics pool every other
/// axis. Training mode normalizes with batch statistics and updates the
/// running buffers in place (unbiased variance); eval mode uses the
/// running buffers.
template <class T>
Tensor<T> batch_norm(const Tensor<T> &x, const Tensor<T> &gamma,
                     const Tensor<T> &beta, Tensor<T> &running_mean,
                     Tensor<T> &running_var, bool training, int channel_axis = 1,
                     T momentum = T(0.1), T eps = T(1e-5)) {
  const std::size_t ax = x.normalize_axis(channel_axis);
  const detail::AxisView v = detail::axis_view(x.shape(), ax);
  const std::size_t C = v.n;
  if (gamma.numel() != C || beta.numel() != C || running_mean.numel() != C
      || running_var.numel() != C)
    shape_error("batch_norm", x.shape(), gamma.shape());
  const std::size_t count = v.outer * v.inner;
  const T *xv = x.data().data();
  std::vector<T> mu(C, 0), rstd(C, 0);
  if (training) {
    for (std::size_t c = 0; c < C; ++c) {
      T s = 0;
      for (std::size_t o = 0; o < v.outer; ++o)
        for (std::size_t i = 0; i < v.inner; ++i)
          s += xv[(o * C + c) * v.inner + i];
      mu[c] = s / static_cast<T>(count);
      T var = 0;
      for (std::size_t o = 0; o < v.outer; ++o)
        for (std::size_t i = 0; i < v.inner; ++i) {
          const T dlt = xv[(o * C + c) * v.inner + i] - mu[c];
          var += dlt * dlt;
        }
      const T biased = var / static_cast<T>(count);
      const T unbiased = count > 1 ? var / static_cast<T>(count - 1) : biased;
      rstd[c] = T(1) / std::sqrt(biased + eps);
      running_mean.data()[c] = (T(1) - momentum) * running_mean.data()[c] + momentum * mu[c];
      running_var.data()[c] = (T(1) - momentum) * running_var.data()[c] + momentum * unbiased;
    }
  } else {
    for (std::size_t c = 0; c < C; ++c) {
      mu[c] = running_mean.data()[c];
      rstd[c] = T(1) / std::sqrt(running_var.data()[c] + eps);
    }
  }

  std::vector<T> out(x.numel()), xhat(x.numel());
  const T *gv = gamma.data().data();
  const T *bv = beta.data().data();
  for (std::size_t o = 0; o < v.outer; ++o)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t i = 0; i < v.inner; ++i) {
        const std::size_t j = (o * C + c) * v.inner + i;
        xhat[j] = (xv[j] - mu[c]) * rstd[c];
        out[j] = xhat[j] * gv[c] + bv[c];
      }

  return make_result<T>(
      x.shape(), std::move(out), { x, gamma, beta },
      [v, C, count, training, xhat = std::move(xhat),
       rstd = std::move(rstd)](Node<T> &self) {
        std::vector<T> *gx = parent_grad(self, 0);
        std::vector<T> *gg = parent_grad(self, 1);
        std::vector<T> *gb = parent_grad(self, 2);
        const T *gv = self.parents[1]->value.data();
        const T *g = self.grad.data();
        for (std::size_t c = 0; c < C; ++c) {
          T sg = 0, sgx = 0;
          for (std::size_t o = 0; o < v.outer; ++o)
            for (std::size_t i = 0; i < v.inner; ++i) {
              const std::size_t j = (o * C + c) * v.inner + i;
              sg += g[j];
              sgx += g[j] * xhat[j];
            }
          if (gg)
            (*gg)[c] += sgx;
          if (gb)
            (*gb)[c] += sg;
          if (!gx)
            continue;
          const T n = static_cast<T>(count);
          for (std::size_t o = 0; o < v.outer; ++o)
            for (std::size_t i = 0; i < v.inner; ++i) {
              const std::size_t j = (o * C + c) * v.inner + i;
              if (training)
                (*gx)[j] += gv[c] * rstd[c] * (g[j] - sg / n - xhat[j] * sgx / n);
              else
                (*gx)[j] += gv[c] * rstd[c] * g[j];
            }
        }
      });
}

/// Inverted dropout. Identity when not training or p == 0.
template <class T, class Rng>
Tensor<T> dropout(const Tensor<T> &x, double p, bool training, Rng &rng) {
  if (!training || p <= 0.0)
    return x;
  if (p >= 1.0)
    throw Error(ErrorKind::kInvalidArgument, "dropout probability must be < 1");
  std::bernoulli_distribution keep(1.0 - p);
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  std::vector<T> mask(x.numel());
  for (T &m: mask)
    m = keep(rng) ? scale : T(0);
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = x.data()[i] * mask[i];
  return make_result<T>(x.shape(), std::move(out), { x },
                        [mask = std::move(mask)](Node<T> &self) {
                          std::vector<T> *gx = parent_grad(self, 0);
                          if (!gx)
                            return;
                          for (std::size_t i = 0; i < mask.size(); ++i)
                            (*gx)[i] += self.grad[i] * mask[i];
                        });
}

/// Row lookup: weight [V, D], ids -> [ids.size(), D].
template <class T>
Tensor<T> embedding(const Tensor<T> &weight, std::span<const int> ids) {
  if (weight.rank() != 2)
    shape_error("embedding", weight.shape(), { ids.size() });
  const std::size_t V = weight.dim(0), D = weight.dim(1);
  std::vector<T> out(ids.size() * D);
  std::vector<int> rows(ids.begin(), ids.end());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || static_cast<std::size_t>(rows[i]) >= V)
      throw Error(ErrorKind::kInvalidArgument,
                  "token id " + std::to_string(rows[i]) + " outside vocabulary of "
                      + std::to_string(V));
    std::copy_n(weight.data().data() + rows[i] * D, D, out.data() + i * D);
  }
  return make_result<T>({ rows.size(), D }, std::move(out), { weight },
                        [rows = std::move(rows), D](Node<T> &self) {
                          std::vector<T> *gw = parent_grad(self, 0);
                          if (!gw)
                            return;
                          for (std::size_t i = 0; i < rows.size(); ++i)
                            for (std::size_t j = 0; j < D; ++j)
                              (*gw)[rows[i] * D + j] += self.grad[i * D + j];
                        });
}

// ---------------------------------------------------------------------------
// Convolutions (im2col + gemm)

namespace detail {

struct Conv2dGeometry {
  std::size_t batch, cin, h, w, cout, kh, kw, stride_h, stride_w, pad_h, pad_w,
      oh, ow;
  std::size_t patch() const { return cin * kh * kw; }
  std::size_t positions() const { return oh * ow; }
};

template <class T>
void im2col(const Conv2dGeometry &g, const T *x, T *cols) {
  const std::size_t P = g.positions();
  for (std::size_t c = 0; c < g.cin; ++c)
    for (std::size_t ki = 0; ki < g.kh; ++ki)
      for (std::size_t kj = 0; kj < g.kw; ++kj) {
        T *row = cols + ((c * g.kh + ki) * g.kw + kj) * P;
        for (std::size_t oi = 0; oi < g.oh; ++oi) {
          const std::ptrdiff_t ii = static_cast<std::ptrdiff_t>(oi * g.stride_h + ki)
                                    - static_cast<std::ptrdiff_t>(g.pad_h);
          for (std::size_t oj = 0; oj < g.ow; ++oj) {
            const std::ptrdiff_t jj = static_cast<std::ptrdiff_t>(oj * g.stride_w + kj)
                                      - static_cast<std::ptrdiff_t>(g.pad_w);
            const bool inside = ii >= 0 && jj >= 0
                                && ii < static_cast<std::ptrdiff_t>(g.h)
                                && jj < static_cast<std::ptrdiff_t>(g.w);
            row[oi * g.ow + oj] = inside ? x[(c * g.h + ii) * g.w + jj] : T(0);
          }
        }
      }
}

template <class T>
void col2im_add(const Conv2dGeometry &g, const T *cols, T *x) {
  const std::size_t P = g.positions();
  for (std::size_t c = 0; c < g.cin; ++c)
    for (std::size_t ki = 0; ki < g.kh; ++ki)
      for (std::size_t kj = 0; kj < g.kw; ++kj) {
        const T *row = cols + ((c * g.kh + ki) * g.kw + kj) * P;
        for (std::size_t oi = 0; oi < g.oh; ++oi) {
          const std::ptrdiff_t ii = static_cast<std::ptrdiff_t>(oi * g.stride_h + ki)
                                    - static_cast<std::ptrdiff_t>(g.pad_h);
          if (ii < 0 || ii >= static_cast<std::ptrdiff_t>(g.h))
            continue;
          for (std::size_t oj = 0; oj < g.ow; ++oj) {
            const std::ptrdiff_t jj = static_cast<std::ptrdiff_t>(oj * g.stride_w + kj)
                                      - static_cast<std::ptrdiff_t>(g.pad_w);
            if (jj < 0 || jj >= static_cast<std::ptrdiff_t>(g.w))
              continue;
            x[(c * g.h + ii) * g.w + jj] += row[oi * g.ow + oj];
          }
        }
      }
}

template <class T>
Tensor<T> conv2d_impl(const Tensor<T> &x, const Tensor<T> &w,
                      const Tensor<T> &bias, const Conv2dGeometry &g,
                      Shape out_shape) {
  const std::size_t patch = g.patch(), P = g.positions();
  std::vector<T> cols(g.batch * patch * P);
  for (std::size_t b = 0; b < g.batch; ++b)
    im2col(g, x.data().data() + b * g.cin * g.h * g.w, cols.data() + b * patch * P);

  std::vector<T> out(g.batch * g.cout * P);
  for (std::size_t b = 0; b < g.batch; ++b) {
    T *ob = out.data() + b * g.cout * P;
    kernel::gemm(false, false, g.cout, P, patch, w.data().data(),
                 cols.data() + b * patch * P, ob, false);
    if (bias.defined())
      for (std::size_t c = 0; c < g.cout; ++c)
        for (std::size_t p = 0; p < P; ++p)
          ob[c * P + p] += bias.data()[c];
  }

  std::vector<Tensor<T>> inputs { x, w };
  if (bias.defined())
    inputs.push_back(bias);
  return make_result<T>(
      std::move(out_shape), std::move(out), inputs,
      [g, cols = std::move(cols)](Node<T> &self) {
        std::vector<T> *gx = parent_grad(self, 0);
        std::vector<T> *gw = parent_grad(self, 1);
        std::vector<T> *gb = self.parents.size() > 2 ? parent_grad(self, 2) : nullptr;
        const std::size_t patch = g.patch(), P = g.positions();
        const T *wv = self.parents[1]->value.data();
        std::vector<T> dcols(gx ? patch * P : 0);
        for (std::size_t b = 0; b < g.batch; ++b) {
          const T *gout = self.grad.data() + b * g.cout * P;
          if (gw)
            kernel::gemm(false, true, g.cout, patch, P, gout,
                         cols.data() + b * patch * P, gw->data(), true);
          if (gb)
            for (std::size_t c = 0; c < g.cout; ++c)
              for (std::size_t p = 0; p < P; ++p)
                (*gb)[c] += gout[c * P + p];
          if (gx) {
            kernel::gemm(true, false, patch, P, g.cout, wv, gout, dcols.data(),
                         false);
            col2im_add(g, dcols.data(), gx->data() + b * g.cin * g.h * g.w);
          }
        }
      });
}

inline std::size_t conv_out(std::size_t in, std::size_t k, std::size_t s,
                            std::size_t p) {
  if (in + 2 * p < k || s == 0)
    throw Error(ErrorKind::kShapeMismatch, "convolution kernel larger than input");
  return (in + 2 * p - k) / s + 1;
}

}  // namespace detail

/// x [B, Cin, H, W], w [Cout, Cin, KH, KW], bias [Cout] or undefined.
template <class T>
Tensor<T> conv2d(const Tensor<T> &x, const Tensor<T> &w, const Tensor<T> &bias,
                 std::size_t stride, std::size_t padding) {
  if (x.rank() != 4 || w.rank() != 4 || x.dim(1) != w.dim(1))
    shape_error("conv2d", x.shape(), w.shape());
  detail::Conv2dGeometry g { x.dim(0), x.dim(1), x.dim(2), x.dim(3),
                             w.dim(0), w.dim(2), w.dim(3), stride, stride,
                             padding, padding, 0, 0 };
  g.oh = detail::conv_out(g.h, g.kh, stride, padding);
  g.ow = detail::conv_out(g.w, g.kw, stride, padding);
  return detail::conv2d_impl(x, w, bias, g, { g.batch, g.cout, g.oh, g.ow });
}

/// x [B, Cin, L], w [Cout, Cin, K], bias [Cout] or undefined.
template <class T>
Tensor<T> conv1d(const Tensor<T> &x, const Tensor<T> &w, const Tensor<T> &bias,
                 std::size_t stride, std::size_t padding) {
  if (x.rank() != 3 || w.rank() != 3 || x.dim(1) != w.dim(1))
    shape_error("conv1d", x.shape(), w.shape());
  detail::Conv2dGeometry g { x.dim(0), x.dim(1), 1, x.dim(2), w.dim(0), 1,
                             w.dim(2), 1, stride, 0, padding, 1, 0 };
  g.ow = detail::conv_out(g.w, g.kw, stride, padding);
  return detail::conv2d_impl(x, w, bias, g, { g.batch, g.cout, g.ow });
}

// ---------------------------------------------------------------------------
// Losses

/// Mean token NLL over targets != ignore. logits [N, V]. Returns 0 when
/// every target is ignored.
template <class T>
Tensor<T> cross_entropy(const Tensor<T> &logits, std::span<const int> targets,
                        int ignore = -1) {
  if (logits.rank() != 2 || logits.dim(0) != targets.size())
    shape_error("cross_entropy", logits.shape(), { targets.size() });
  const std::size_t N = logits.dim(0), V = logits.dim(1);
  std::vector<T> probs(N * V);
  std::vector<int> tgt(targets.begin(), targets.end());
  T loss = 0;
  std::size_t count = 0;
  const T *lv = logits.data().data();
  for (std::size_t r = 0; r < N; ++r) {
    const T *row = lv + r * V;
    T mx = *std::max_element(row, row + V);
    T s = 0;
    for (std::size_t j = 0; j < V; ++j) {
      probs[r * V + j] = std::exp(row[j] - mx);
      s += probs[r * V + j];
    }
    for (std::size_t j = 0; j < V; ++j)
      probs[r * V + j] /= s;
    if (tgt[r] == ignore)
      continue;
    if (tgt[r] < 0 || static_cast<std::size_t>(tgt[r]) >= V)
      throw Error(ErrorKind::kInvalidArgument, "target outside vocabulary");
    loss += -(row[tgt[r]] - mx - std::log(s));
    ++count;
  }
  const T denom = count > 0 ? static_cast<T>(count) : T(1);
  return make_result<T>(
      {}, { loss / denom }, { logits },
      [probs = std::move(probs), tgt = std::move(tgt), N, V, ignore,
       denom](Node<T> &self) {
        std::vector<T> *gl = parent_grad(self, 0);
        if (!gl)
          return;
        const T g = self.grad[0] / denom;
        for (std::size_t r = 0; r < N; ++r) {
          if (tgt[r] == ignore)
            continue;
          for (std::size_t j = 0; j < V; ++j)
            (*gl)[r * V + j] += g * probs[r * V + j];
          (*gl)[r * V + tgt[r]] -= g;
        }
      });
}

/// Weighted mean of softplus(z) - y z over N logits.
template <class T>
Tensor<T> bce_with_logits(const Tensor<T> &logits, std::span<const T> labels,
                          std::span<const T> weights = {}) {
  if (logits.numel() != labels.size()
      || (!weights.empty() && weights.size() != labels.size()))
    shape_error("bce_with_logits", logits.shape(), { labels.size() });
  const std::size_t N = labels.size();
  std::vector<T> y(labels.begin(), labels.end());
  std::vector<T> w(N, T(1));
  if (!weights.empty())
    w.assign(weights.begin(), weights.end());
  T wsum = 0, loss = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const T z = logits.data()[i];
    loss += w[i] * (softplus_value(z) - y[i] * z);
    wsum += w[i];
  }
  return make_result<T>(
      {}, { loss / wsum }, { logits },
      [y = std::move(y), w = std::move(w), wsum](Node<T> &self) {
        std::vector<T> *gl = parent_grad(self, 0);
        if (!gl)
          return;
        const T *z = self.parents[0]->value.data();
        for (std::size_t i = 0; i < y.size(); ++i)
          (*gl)[i] += self.grad[0] * w[i] * (sigmoid_value(z[i]) - y[i]) / wsum;
      });
}

}  // namespace molrange::nn
