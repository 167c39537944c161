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

#include <cstddef>

#include "kpn/simd/gemm.hpp"

namespace kpn::simd::scalar {

template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t M, std::size_t N,
          std::size_t K, const T* A, std::size_t lda, const T* B,
          std::size_t ldb, T* C, std::size_t ldc, bool accumulate) {
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      T sum = 0;
      for (std::size_t k = 0; k < K; ++k) {
        const T a = trans_a ? A[k * lda + i] : A[i * lda + k];
        const T b = trans_b ? B[j * ldb + k] : B[k * ldb + j];
        sum += a * b;
      }
      T& c = C[i * ldc + j];
      c = accumulate ? c + sum : sum;
    }
  }
}

template void gemm<float>(bool, bool, std::size_t, std::size_t, std::size_t,
                          const float*, std::size_t, const float*, std::size_t,
                          float*, std::size_t, bool);
template void gemm<double>(bool, bool, std::size_t, std::size_t, std::size_t,
                           const double*, std::size_t, const double*,
                           std::size_t, double*, std::size_t, bool);

}  // namespace kpn::simd::scalar
