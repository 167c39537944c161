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
#include <cstdint>
#include <string>
#include <vector>

namespace kpn {

struct GradCheckOptions {
  std::uint64_t seed = 0;
  std::size_t cases = 20;
  std::size_t size = 16;
  double tolerance = 1e-4;
  // Test hook: scales the analytic gradient of this component by 1.01.
  std::string corrupt;
};

struct GradCheckResult {
  std::string component;
  std::size_t cases = 0;
  std::size_t checked = 0;  // entries compared
  std::size_t skipped = 0;  // entries with a kink inside the FD stencil
  double max_rel_error = 0;
  double tolerance = 0;
  bool passed() const { return checked > 0 && max_rel_error <= tolerance; }
};

// Names of the components run_grad_checks covers, in report order.
std::vector<std::string> grad_check_components();

// Central finite differences against the analytic gradients.
//   error = |a - n| / max(|a|, |n|), measured where |a| + |n| > 1e-8
// Entries whose one-sided differences disagree (a clamp or branch boundary
// inside the stencil) are skipped and counted.
std::vector<GradCheckResult> run_grad_checks(const GradCheckOptions& options);

// Runs a single named component; ConfigError for unknown names.
GradCheckResult run_grad_check(const std::string& component,
                               const GradCheckOptions& options);

}  // namespace kpn
