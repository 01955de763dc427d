//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace molrange::nn::kernel {

// C (M x N) = or += A (M x K) * B (K x N), all row-major and contiguous.
// Four rows of C are updated per pass over a B row so each loaded B element
// is reused; the j loops are plain axpy and vectorize without reassociation.
template <class T>
void gemm_nn(std::size_t M, std::size_t N, std::size_t K, const T *A,
             const T *B, T *C, bool accumulate) {
  if (!accumulate)
    std::fill(C, C + M * N, T(0));
  constexpr std::size_t kTileN = 256;
  std::size_t i = 0;
  for (; i + 4 <= M; i += 4) {
    T *__restrict c0 = C + (i + 0) * N;
    T *__restrict c1 = C + (i + 1) * N;
    T *__restrict c2 = C + (i + 2) * N;
    T *__restrict c3 = C + (i + 3) * N;
    const T *a0 = A + (i + 0) * K;
    const T *a1 = A + (i + 1) * K;
    const T *a2 = A + (i + 2) * K;
    const T *a3 = A + (i + 3) * K;
    for (std::size_t j0 = 0; j0 < N; j0 += kTileN) {
      const std::size_t jn = std::min(N, j0 + kTileN);
      for (std::size_t k = 0; k < K; ++k) {
        const T *__restrict b = B + k * N;
        const T x0 = a0[k], x1 = a1[k], x2 = a2[k], x3 = a3[k];
        for (std::size_t j = j0; j < jn; ++j) {
          const T bj = b[j];
          c0[j] += x0 * bj;
          c1[j] += x1 * bj;
          c2[j] += x2 * bj;
          c3[j] += x3 * bj;
        }
      }
    }
  }
  for (; i < M; ++i) {
    T *c = C + i * N;
    const T *a = A + i * K;
    for (std::size_t k = 0; k < K; ++k) {
      const T *b = B + k * N;
      const T x = a[k];
      for (std::size_t j = 0; j < N; ++j)
        c[j] += x * b[j];
    }
  }
}

template <class T>
void transpose_into(std::size_t rows, std::size_t cols, const T *src, T *dst) {
  constexpr std::size_t kBlock = 32;
  for (std::size_t r0 = 0; r0 < rows; r0 += kBlock) {
    for (std::size_t c0 = 0; c0 < cols; c0 += kBlock) {
      const std::size_t rn = std::min(rows, r0 + kBlock);
      const std::size_t cn = std::min(cols, c0 + kBlock);
      for (std::size_t r = r0; r < rn; ++r)
        for (std::size_t c = c0; c < cn; ++c)
          dst[c * rows + r] = src[r * cols + c];
    }
  }
}

/// General product with optional transposes. A is stored M x K (or K x M
/// when trans_a), B is stored K x N (or N x K when trans_b).
template <class T>
void gemm(bool trans_a, bool trans_b, std::size_t M, std::size_t N,
          std::size_t K, const T *A, const T *B, T *C, bool accumulate) {
  thread_local std::vector<T> scratch_a, scratch_b;
  if (trans_a) {
    scratch_a.resize(M * K);
    transpose_into(K, M, A, scratch_a.data());
    A = scratch_a.data();
  }
  if (trans_b) {
    scratch_b.resize(K * N);
    transpose_into(N, K, B, scratch_b.data());
    B = scratch_b.data();
  }
  gemm_nn(M, N, K, A, B, C, accumulate);
}

}  // namespace molrange::nn::kernel
