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

#include "kpn/tape.hpp"

namespace kpn {

// Probabilities are clamped to [eps, 1 - eps] before every log.
inline constexpr double kLogEpsilon = 1e-7;

// Clamps a probability into [eps, 1 - eps]. NumericError if it is not finite.
Var clamp_probability(Var p);

struct DiscLoss {
  Var l_h;    // -log(1 - D(P_t)) - log D(P_r)
  Var l_r;    // -log(1 - D(I_t)) - log D(I_r)
  Var total;  // l_h + l_r
};

// Discriminator objective on the four scalar discriminator outputs.
DiscLoss disc_loss(Var d_pt, Var d_pr, Var d_tl, Var d_rl);

struct GenLoss {
  Var l_h;    // -log D(P_t)
  Var l_r;    // -log D(I_t)
  Var l_id;   // lambda_id * MSE(P_t, P_s)
  Var total;
};

// Non-saturating generator objective plus the identity term.
GenLoss gen_loss(Var d_pt, Var d_tl, Var p_t, Var p_s, double lambda_id = 1.0);

// Mean per-location binary cross-entropy of a logit map against a constant
// target (1 for real, 0 for translated).
Var bce_logits_mean(Var logits, bool target_real);

}  // namespace kpn
