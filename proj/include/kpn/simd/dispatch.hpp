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

namespace kpn::simd {

enum class Isa { kScalar, kAvx2 };

const char* isa_name(Isa isa);

// Best instruction set that is both compiled in and supported by this CPU.
Isa detected_isa();

// Instruction set the kernels dispatch to. Starts at detected_isa() unless
// the environment sets KPN_SIMD=scalar.
Isa active_isa();

// Forces a kernel family; throws ConfigError if the CPU or build lacks it.
void set_active_isa(Isa isa);

// RAII override used by equivalence tests and benchmarks.
class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa);
  ~ScopedIsa();
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  Isa previous_;
};

}  // namespace kpn::simd
