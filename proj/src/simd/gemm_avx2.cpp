/* Copyright 2026 The kpn-translate Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

// AVX2/FMA GEMM: packed panels, 6 x (2 * lanes) register micro-kernel.

#include <immintrin.h>

#include <algorithm>
#include <cstddef>
#include <vector>

#include "kpn/simd/gemm.hpp"

namespace kpn::simd::avx2 {
namespace {

template <typename T>
struct Vec;

template <>
struct Vec<double> {
  using type = __m256d;
  static constexpr std::size_t kLanes = 4;
  static type zero() { return _mm256_setzero_pd(); }
  static type load(const double* p) { return _mm256_loadu_pd(p); }
  static type broadcast(const double* p) { return _mm256_broadcast_sd(p); }
  static type fmadd(type a, type b, type c) { return _mm256_fmadd_pd(a, b, c); }
  static void store(double* p, type v) { _mm256_storeu_pd(p, v); }
};

template <>
struct Vec<float> {
  using type = __m256;
  static constexpr std::size_t kLanes = 8;
  static type zero() { return _mm256_setzero_ps(); }
  static type load(const float* p) { return _mm256_loadu_ps(p); }
  static type broadcast(const float* p) { return _mm256_broadcast_ss(p); }
  static type fmadd(type a, type b, type c) { return _mm256_fmadd_ps(a, b, c); }
  static void store(float* p, type v) { _mm256_storeu_ps(p, v); }
};

constexpr std::size_t kMr = 6;
constexpr std::size_t kKc = 256;
constexpr std::size_t kMc = 96;
constexpr std::size_t kNc = 2048;

template <typename T>
constexpr std::size_t kNr = 2 * Vec<T>::kLanes;

// Packs op(A)[i0:i0+mc, k0:k0+kc] into kMr-row panels, k-major within a panel.
template <typename T>
void pack_a(bool trans, const T* A, std::size_t lda, std::size_t i0,
            std::size_t mc, std::size_t k0, std::size_t kc, T* out) {
  for (std::size_t p = 0; p < mc; p += kMr) {
    const std::size_t rows = std::min(kMr, mc - p);
    for (std::size_t k = 0; k < kc; ++k) {
      for (std::size_t r = 0; r < kMr; ++r) {
        T v = 0;
        if (r < rows) {
          const std::size_t i = i0 + p + r;
          v = trans ? A[(k0 + k) * lda + i] : A[i * lda + k0 + k];
        }
        *out++ = v;
      }
    }
  }
}

// Packs op(B)[k0:k0+kc, j0:j0+nc] into kNr-column panels.
template <typename T>
void pack_b(bool trans, const T* B, std::size_t ldb, std::size_t k0,
            std::size_t kc, std::size_t j0, std::size_t nc, T* out) {
  constexpr std::size_t nr = kNr<T>;
  for (std::size_t q = 0; q < nc; q += nr) {
    const std::size_t cols = std::min(nr, nc - q);
    for (std::size_t k = 0; k < kc; ++k) {
      if (!trans && cols == nr) {
        const T* src = B + (k0 + k) * ldb + j0 + q;
        std::copy(src, src + nr, out);
        out += nr;
        continue;
      }
      for (std::size_t c = 0; c < nr; ++c) {
        T v = 0;
        if (c < cols) {
          const std::size_t j = j0 + q + c;
          v = trans ? B[j * ldb + k0 + k] : B[(k0 + k) * ldb + j];
        }
        *out++ = v;
      }
    }
  }
}

// tile[kMr x kNr] = Ap-panel * Bp-panel over kc.
template <typename T>
inline void micro_kernel(std::size_t kc, const T* ap, const T* bp, T* tile) {
  using V = Vec<T>;
  constexpr std::size_t L = V::kLanes;
  typename V::type c[kMr][2];
  for (std::size_t r = 0; r < kMr; ++r) c[r][0] = c[r][1] = V::zero();
  for (std::size_t k = 0; k < kc; ++k) {
    const auto b0 = V::load(bp);
    const auto b1 = V::load(bp + L);
    for (std::size_t r = 0; r < kMr; ++r) {
      const auto a = V::broadcast(ap + r);
      c[r][0] = V::fmadd(a, b0, c[r][0]);
      c[r][1] = V::fmadd(a, b1, c[r][1]);
    }
    ap += kMr;
    bp += 2 * L;
  }
  for (std::size_t r = 0; r < kMr; ++r) {
    V::store(tile + r * 2 * L, c[r][0]);
    V::store(tile + r * 2 * L + L, c[r][1]);
  }
}

}  // namespace

template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t M, std::size_t N,
          std::size_t K, const T* A, std::size_t lda, const T* B,
          std::size_t ldb, T* C, std::size_t ldc, bool accumulate) {
  constexpr std::size_t nr = kNr<T>;
  if (M == 0 || N == 0) return;
  if (K == 0) {
    if (!accumulate)
      for (std::size_t i = 0; i < M; ++i)
        std::fill(C + i * ldc, C + i * ldc + N, T(0));
    return;
  }
  thread_local std::vector<T> a_buf, b_buf;
  a_buf.resize(((kMc + kMr - 1) / kMr) * kMr * kKc);
  b_buf.resize(((kNc + nr - 1) / nr) * nr * kKc);
  alignas(32) T tile[kMr * nr];

  for (std::size_t jc = 0; jc < N; jc += kNc) {
    const std::size_t nc = std::min(kNc, N - jc);
    for (std::size_t pc = 0; pc < K; pc += kKc) {
      const std::size_t kc = std::min(kKc, K - pc);
      const bool add = accumulate || pc > 0;
      pack_b(trans_b, B, ldb, pc, kc, jc, nc, b_buf.data());
      for (std::size_t ic = 0; ic < M; ic += kMc) {
        const std::size_t mc = std::min(kMc, M - ic);
        pack_a(trans_a, A, lda, ic, mc, pc, kc, a_buf.data());
        for (std::size_t jr = 0; jr < nc; jr += nr) {
          const std::size_t cols = std::min(nr, nc - jr);
          const T* bp = b_buf.data() + (jr / nr) * nr * kc;
          for (std::size_t ir = 0; ir < mc; ir += kMr) {
            const std::size_t rows = std::min(kMr, mc - ir);
            const T* ap = a_buf.data() + (ir / kMr) * kMr * kc;
            micro_kernel<T>(kc, ap, bp, tile);
            for (std::size_t r = 0; r < rows; ++r) {
              T* crow = C + (ic + ir + r) * ldc + jc + jr;
              const T* trow = tile + r * nr;
              if (add) {
                for (std::size_t c = 0; c < cols; ++c) crow[c] += trow[c];
              } else {
                for (std::size_t c = 0; c < cols; ++c) crow[c] = trow[c];
              }
            }
          }
        }
      }
    }
  }
}

template void gemm<float>(bool, bool, std::size_t, std::size_t, std::size_t,
                          const float*, std::size_t, const float*, std::size_t,
                          float*, std::size_t, bool);
template void gemm<double>(bool, bool, std::size_t, std::size_t, std::size_t,
                           const double*, std::size_t, const double*,
                           std::size_t, double*, std::size_t, bool);

}  // namespace kpn::simd::avx2
