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

#include "kpn/losses.hpp"

#include <cmath>

#include "kpn/ops.hpp"

namespace kpn {
namespace {

Var one_minus(Var p) {
  return add(scale(p, Real(-1)), p.tape->constant(Tensor::scalar(1)));
}

Var neg_log(Var p) { return scale(log(p), Real(-1)); }

}  // namespace

Var clamp_probability(Var p) {
  const Tensor& v = p.value();
  for (std::size_t i = 0; i < v.numel(); ++i) {
    if (!std::isfinite(static_cast<double>(v[i]))) {
      throw NumericError("discriminator output is not finite");
    }
  }
  return clamp(p, static_cast<Real>(kLogEpsilon),
               static_cast<Real>(1.0 - kLogEpsilon));
}

DiscLoss disc_loss(Var d_pt, Var d_pr, Var d_tl, Var d_rl) {
  d_pt = clamp_probability(d_pt);
  d_pr = clamp_probability(d_pr);
  d_tl = clamp_probability(d_tl);
  d_rl = clamp_probability(d_rl);
  DiscLoss out;
  out.l_h = add(neg_log(one_minus(d_pt)), neg_log(d_pr));
  out.l_r = add(neg_log(one_minus(d_tl)), neg_log(d_rl));
  out.total = add(out.l_h, out.l_r);
  return out;
}

GenLoss gen_loss(Var d_pt, Var d_tl, Var p_t, Var p_s, double lambda_id) {
  GenLoss out;
  out.l_h = neg_log(clamp_probability(d_pt));
  out.l_r = neg_log(clamp_probability(d_tl));
  out.l_id = scale(mse_mean(p_t, p_s), static_cast<Real>(lambda_id));
  out.total = add(add(out.l_h, out.l_r), out.l_id);
  return out;
}

Var bce_logits_mean(Var logits, bool target_real) {
  // -log sigmoid(z) = softplus(-z); -log(1 - sigmoid(z)) = softplus(z)
  return mean(softplus(target_real ? scale(logits, Real(-1)) : logits));
}

}  // namespace kpn
