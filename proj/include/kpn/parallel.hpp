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
#include <functional>

namespace kpn {

// Worker count used by parallel_for. Defaults to KPN_NUM_THREADS or the
// hardware concurrency. Results never depend on this value: work items are
// independent and written to disjoint outputs.
std::size_t num_threads();
void set_num_threads(std::size_t n);

// Runs fn(i) for i in [0, n). Items are claimed dynamically; fn must only
// touch state owned by item i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace kpn
