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

#pragma once

#include <cstddef>

namespace kpn::simd {

// Row-major GEMM: C[M x N] = (accumulate ? C : 0) + op(A)[M x K] * op(B)[K x N]
// where op(X) is X or its transpose. Dispatches on active_isa().
template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t M, std::size_t N,
          std::size_t K, const T* A, std::size_t lda, const T* B,
          std::size_t ldb, T* C, std::size_t ldc, bool accumulate);

namespace scalar {
template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t M, std::size_t N,
          std::size_t K, const T* A, std::size_t lda, const T* B,
          std::size_t ldb, T* C, std::size_t ldc, bool accumulate);
}  // namespace scalar

namespace avx2 {
template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t M, std::size_t N,
          std::size_t K, const T* A, std::size_t lda, const T* B,
          std::size_t ldb, T* C, std::size_t ldc, bool accumulate);
}  // namespace avx2

}  // namespace kpn::simd
