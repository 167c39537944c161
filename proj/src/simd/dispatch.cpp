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

#include "kpn/simd/dispatch.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "kpn/common.hpp"
#include "kpn/simd/gemm.hpp"
#include "kpn/simd/svblur.hpp"

namespace kpn::simd {
namespace {

bool cpu_has_avx2() {
#if defined(KPN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() {
  if (const char* env = std::getenv("KPN_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::kScalar;
  }
  return detected_isa();
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

Isa detected_isa() {
  static const Isa isa = cpu_has_avx2() ? Isa::kAvx2 : Isa::kScalar;
  return isa;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (isa == Isa::kAvx2 && detected_isa() != Isa::kAvx2) {
    throw ConfigError("avx2 kernels unavailable on this build or CPU");
  }
  active().store(isa);
}

ScopedIsa::ScopedIsa(Isa isa) : previous_(active_isa()) { set_active_isa(isa); }
ScopedIsa::~ScopedIsa() { active().store(previous_); }

template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t M, std::size_t N,
          std::size_t K, const T* A, std::size_t lda, const T* B,
          std::size_t ldb, T* C, std::size_t ldc, bool accumulate) {
#if defined(KPN_HAVE_AVX2)
  if (active_isa() == Isa::kAvx2) {
    avx2::gemm(trans_a, trans_b, M, N, K, A, lda, B, ldb, C, ldc, accumulate);
    return;
  }
#endif
  scalar::gemm(trans_a, trans_b, M, N, K, A, lda, B, ldb, C, ldc, accumulate);
}

template void gemm<float>(bool, bool, std::size_t, std::size_t, std::size_t,
                          const float*, std::size_t, const float*, std::size_t,
                          float*, std::size_t, bool);
template void gemm<double>(bool, bool, std::size_t, std::size_t, std::size_t,
                           const double*, std::size_t, const double*,
                           std::size_t, double*, std::size_t, bool);

template <typename T>
void svblur_forward(const BlurPlane<T>& plane, T* out) {
#if defined(KPN_HAVE_AVX2)
  if (active_isa() == Isa::kAvx2) {
    avx2::svblur_forward(plane, out);
    return;
  }
#endif
  scalar::svblur_forward(plane, out);
}

template void svblur_forward<float>(const BlurPlane<float>&, float*);
template void svblur_forward<double>(const BlurPlane<double>&, double*);

void svblur_moment(const BlurPlane<double>& plane, double* out) {
#if defined(KPN_HAVE_AVX2)
  if (active_isa() == Isa::kAvx2) {
    avx2::svblur_moment(plane, out);
    return;
  }
#endif
  scalar::svblur_moment(plane, out);
}

void svblur_scatter(const BlurPlane<double>& plane, const double* grad,
                    double* grad_src) {
#if defined(KPN_HAVE_AVX2)
  if (active_isa() == Isa::kAvx2) {
    avx2::svblur_scatter(plane, grad, grad_src);
    return;
  }
#endif
  scalar::svblur_scatter(plane, grad, grad_src);
}

}  // namespace kpn::simd
