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

#include <gtest/gtest.h>

#include <cmath>

#include "kpn/losses.hpp"
#include "kpn/networks.hpp"
#include "kpn/ops.hpp"
#include "kpn/tape.hpp"
#include "test_util.hpp"

namespace kpn {
namespace {

using testing::central_diff;
using testing::random_tensor;
using testing::rel_err;

TEST(Conv2d, OnesKernelCountsNeighbours) {
  const Tensor x({1, 3, 3}, 1);
  const Tensor w({1, 1, 3, 3}, 1);
  const Tensor b({1}, 0);
  const Tensor y = conv2d_forward(x, w, b, 1, 1);
  ASSERT_EQ(y.shape(), (Shape{1, 3, 3}));
  EXPECT_EQ(y.at(0, 1, 1), 9);
  EXPECT_EQ(y.at(0, 0, 0), 4);
  EXPECT_EQ(y.at(0, 2, 2), 4);
  EXPECT_EQ(y.at(0, 0, 1), 6);
}

TEST(Conv2d, UnitPointwiseKernelIsIdentity) {
  const Tensor x = random_tensor({1, 5, 7}, 1);
  const Tensor y = conv2d_forward(x, Tensor({1, 1, 1, 1}, 1), Tensor({1}, 0), 1, 0);
  EXPECT_EQ(max_abs_diff(x, y), 0);
}

TEST(Conv2d, OutputShape) {
  const Tensor x({3, 96, 160});
  const Tensor y = conv2d_forward(x, Tensor({12, 3, 3, 3}), Tensor({12}), 1, 1);
  EXPECT_EQ(y.shape(), (Shape{12, 96, 160}));
  EXPECT_EQ(conv_out_size(90, 4, 2, 1), 45u);
  EXPECT_EQ(conv_out_size(11, 3, 1, 1), 11u);
}

TEST(Conv2d, ChannelMismatchNamesDims) {
  const Tensor x({2, 4, 4});
  try {
    conv2d_forward(x, Tensor({1, 3, 3, 3}), Tensor({1}), 1, 1);
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find('2'), std::string::npos);
    EXPECT_NE(std::string(e.what()).find('3'), std::string::npos);
  }
}

TEST(Conv2dBackward, ScalarProductRule) {
  const Tensor x({1, 1, 1}, 3), w({1, 1, 1, 1}, 2);
  const Conv2dGrads g = conv2d_backward(Tensor({1, 1, 1}, 1), x, w, 1, 0);
  EXPECT_EQ(g.weight[0], 3);
  EXPECT_EQ(g.input[0], 2);
  EXPECT_EQ(g.bias[0], 1);
}

TEST(Conv2dBackward, ZeroUpstreamGivesZero) {
  const Tensor x = random_tensor({2, 4, 4}, 2), w = random_tensor({3, 2, 3, 3}, 3);
  const Conv2dGrads g = conv2d_backward(Tensor({3, 4, 4}), x, w, 1, 1);
  for (const Tensor* t : {&g.input, &g.weight, &g.bias})
    for (std::size_t i = 0; i < t->numel(); ++i) EXPECT_EQ((*t)[i], 0);
}

TEST(Conv2dBackward, MatchesFiniteDifferences) {
  Tensor x = random_tensor({2, 4, 4}, 4);
  Tensor w = random_tensor({3, 2, 3, 3}, 5);
  Tensor b = random_tensor({3}, 6);
  for (std::size_t stride : {1, 2}) {
    const Tensor y = conv2d_forward(x, w, b, stride, 1);
    const Tensor r = random_tensor(y.shape(), 7);
    const Conv2dGrads g = conv2d_backward(r, x, w, stride, 1);
    auto loss = [&] { return testing::weighted_sum(r, conv2d_forward(x, w, b, stride, 1)); };
    double worst = 0;
    for (std::size_t i = 0; i < w.numel(); ++i)
      worst = std::max(worst, rel_err(g.weight[i], central_diff(w, i, loss)));
    for (std::size_t i = 0; i < x.numel(); ++i)
      worst = std::max(worst, rel_err(g.input[i], central_diff(x, i, loss)));
    for (std::size_t i = 0; i < b.numel(); ++i)
      worst = std::max(worst, rel_err(g.bias[i], central_diff(b, i, loss)));
    EXPECT_LE(worst, 1e-6) << "stride " << stride;
  }
}

TEST(LeakyRelu, ValuesAndSlope) {
  Tape t;
  Var x = t.leaf(Tensor({3}, std::vector<Real>{2.0, -1.0, -3.0}), true);
  Var y = leaky_relu(x, 0.2);
  EXPECT_DOUBLE_EQ(y.value()[0], 2.0);
  EXPECT_DOUBLE_EQ(y.value()[1], -0.2);
  t.backward(mean(y));
  EXPECT_DOUBLE_EQ(t.grad(x)[2] * 3, 0.2);
  EXPECT_DOUBLE_EQ(t.grad(x)[0] * 3, 1.0);
}

TEST(BilinearResize, HalfPixelCenters) {
  const Tensor x({1, 1, 2}, std::vector<Real>{0, 1});
  const Tensor y = resize_bilinear(x, 1, 4);
  ASSERT_EQ(y.shape(), (Shape{1, 1, 4}));
  EXPECT_DOUBLE_EQ(y[0], 0.0);
  EXPECT_DOUBLE_EQ(y[1], 0.25);
  EXPECT_DOUBLE_EQ(y[2], 0.75);
  EXPECT_DOUBLE_EQ(y[3], 1.0);
}

TEST(BilinearResize, ConstantStaysConstant) {
  const Tensor y = resize_bilinear(Tensor({2, 12, 20}, 0.37), 90, 160);
  ASSERT_EQ(y.shape(), (Shape{2, 90, 160}));
  for (std::size_t i = 0; i < y.numel(); ++i) EXPECT_NEAR(y[i], 0.37, 1e-15);
}

TEST(BilinearResize, SameSizeIsIdentity) {
  const Tensor x = random_tensor({3, 13, 21}, 8);
  EXPECT_LE(max_abs_diff(resize_bilinear(x, 13, 21), x), 1e-12);
}

TEST(BilinearResize, BackwardMatchesFiniteDifferences) {
  Tape t;
  Tensor x = random_tensor({2, 5, 7}, 9);
  const Tensor r = random_tensor({2, 9, 4}, 10);
  Var xv = t.leaf(x, true);
  Var y = bilinear_resize(xv, 9, 4);
  t.backward(mean(mul(y, t.constant(r))));
  const Tensor g = t.grad(xv);
  auto loss = [&] { return testing::weighted_sum(r, resize_bilinear(x, 9, 4)) / r.numel(); };
  for (std::size_t i = 0; i < x.numel(); ++i)
    EXPECT_LE(rel_err(g[i], central_diff(x, i, loss)), 1e-6);
}

TEST(Elementwise, ReferenceValues) {
  Tape t;
  Var a = t.leaf(Tensor({2}, std::vector<Real>{1, 2}));
  EXPECT_EQ(mse_mean(a, a).value().item(), 0);
  EXPECT_EQ(sigmoid(t.leaf(Tensor::scalar(0))).value().item(), 0.5);
  EXPECT_NEAR(softplus(t.leaf(Tensor::scalar(0))).value().item(), std::log(2.0), 1e-15);
  EXPECT_THROW(log(t.leaf(Tensor::scalar(0))), DomainError);
  EXPECT_THROW(log(t.leaf(Tensor::scalar(-1))), DomainError);
}

TEST(Elementwise, ClampPassesGradientInsideOnly) {
  Tape t;
  Var x = t.leaf(Tensor({3}, std::vector<Real>{-0.5, 0.5, 1.5}), true);
  t.backward(mean(clamp(x, 0, 1)));
  const Tensor g = t.grad(x);
  EXPECT_EQ(g[0], 0);
  EXPECT_DOUBLE_EQ(g[1], 1.0 / 3);
  EXPECT_EQ(g[2], 0);
}

// Every recorded elementwise op against finite differences on [-1, 1].
TEST(Elementwise, GradientsMatchFiniteDifferences) {
  using Op = std::function<Var(Var, Var)>;
  const std::vector<std::pair<const char*, Op>> ops = {
      {"add", [](Var a, Var b) { return add(a, b); }},
      {"sub", [](Var a, Var b) { return sub(a, b); }},
      {"mul", [](Var a, Var b) { return mul(a, b); }},
      {"scale", [](Var a, Var) { return scale(a, -1.7); }},
      {"exp", [](Var a, Var) { return exp(a); }},
      {"log", [](Var a, Var) { return log(add(exp(a), a.tape->constant(Tensor(a.shape(), 0.5)))); }},
      {"clamp", [](Var a, Var) { return clamp(a, -0.5, 0.5); }},
      {"sigmoid", [](Var a, Var) { return sigmoid(a); }},
      {"softplus", [](Var a, Var) { return softplus(a); }},
      {"mse", [](Var a, Var b) { return mse_mean(a, b); }},
      {"leaky", [](Var a, Var) { return leaky_relu(a, 0.2); }},
  };
  for (const auto& [name, op] : ops) {
    Tensor a = random_tensor({2, 3, 4}, 11), b = random_tensor({2, 3, 4}, 12);
    const Tensor r = random_tensor({2, 3, 4}, 13);
    auto eval = [&](bool grads, Tensor* ga, Tensor* gb) {
      Tape t;
      Var av = t.leaf(a, grads), bv = t.leaf(b, grads);
      Var y = op(av, bv);
      Var loss = y.value().numel() == 1 ? y : mean(mul(y, t.constant(r)));
      if (grads) {
        t.backward(loss);
        *ga = t.grad(av);
        *gb = t.grad(bv);
      }
      return static_cast<double>(loss.value().item());
    };
    Tensor ga, gb;
    eval(true, &ga, &gb);
    auto f = [&] { return eval(false, nullptr, nullptr); };
    for (std::size_t i = 0; i < a.numel(); ++i) {
      // Clamp and leaky ReLU are only checked away from their kinks.
      if (std::abs(std::abs(a[i]) - 0.5) < 1e-3 || std::abs(a[i]) < 1e-3) continue;
      const double na = central_diff(a, i, f), nb = central_diff(b, i, f);
      if (std::abs(ga[i]) + std::abs(na) > 1e-8) {
        EXPECT_LE(rel_err(ga[i], na), 1e-4) << name << " a[" << i << "]";
      }
      if (std::abs(gb[i]) + std::abs(nb) > 1e-8) {
        EXPECT_LE(rel_err(gb[i], nb), 1e-4) << name << " b[" << i << "]";
      }
    }
  }
}

TEST(Backward, ScalarIdentityAndSquare) {
  Tape t;
  Var x = t.leaf(Tensor::scalar(3), true);
  t.backward(x);
  EXPECT_EQ(t.grad(x).item(), 1);
  Tape t2;
  Var y = t2.leaf(Tensor::scalar(3), true);
  t2.backward(mul(y, y));
  EXPECT_EQ(t2.grad(y).item(), 6);
}

TEST(Backward, SharedSubexpressionSumsPaths) {
  // z = a * b, loss = z + z * a: d/da = b + 2ab, d/db = a + a^2.
  Tape t;
  Var a = t.leaf(Tensor::scalar(1.5), true);
  Var b = t.leaf(Tensor::scalar(-2.0), true);
  Var z = mul(a, b);
  t.backward(add(z, mul(z, a)));
  EXPECT_DOUBLE_EQ(t.grad(a).item(), -2.0 + 2 * 1.5 * -2.0);
  EXPECT_DOUBLE_EQ(t.grad(b).item(), 1.5 + 1.5 * 1.5);
}

TEST(Backward, DiamondGraph) {
  // y = exp(x) feeds two branches that rejoin.
  Tape t;
  Var x = t.leaf(Tensor::scalar(0.3), true);
  Var y = exp(x);
  t.backward(add(scale(y, 2), mul(y, y)));
  const double e = std::exp(0.3);
  EXPECT_NEAR(t.grad(x).item(), 2 * e + 2 * e * e, 1e-14);
}

TEST(Backward, NonScalarLossRejected) {
  Tape t;
  Var x = t.leaf(Tensor({2}, 1), true);
  EXPECT_THROW(t.backward(x), ContractError);
}

TEST(Backward, DiscriminatorLossOnSmallInputMatchesFiniteDifferences) {
  Discriminator d = Discriminator::init(3);
  std::mt19937 gen(14);
  for (NamedTensor& p : d.params()) {
    if (p.value.rank() == 4) {
      const double fan = p.value.dim(1) * p.value.dim(2) * p.value.dim(3);
      p.value = random_tensor(p.value.shape(), gen(), -std::sqrt(6 / fan), std::sqrt(6 / fan));
    }
  }
  const Tensor fake = random_tensor({3, 8, 8}, 15, 0, 1);
  const Tensor real = random_tensor({3, 8, 8}, 16, 0, 1);
  auto loss_of = [&](Tape& t, const std::vector<Var>& v) {
    Var pf = discriminator_probability(d.forward(t.constant(fake), v));
    Var pr = discriminator_probability(d.forward(t.constant(real), v));
    return disc_loss(pf, pr, pf, pr).total;
  };
  Tape t;
  const auto vars = bind_params(t, d.params(), true);
  t.backward(loss_of(t, vars));
  auto f = [&] {
    Tape t2;
    return static_cast<double>(loss_of(t2, bind_params(t2, d.params(), false)).value().item());
  };
  std::mt19937 pick(17);
  std::size_t checked = 0;
  for (std::size_t k = 0; k < d.params().size(); ++k) {
    const Tensor g = t.grad(vars[k]);
    Tensor& value = d.params()[k].value;
    for (int s = 0; s < 6; ++s) {
      const std::size_t i = pick() % value.numel();
      const double n = central_diff(value, i, f);
      if (std::abs(g[i]) + std::abs(n) <= 1e-8) continue;
      EXPECT_LE(rel_err(g[i], n), 1e-4) << d.params()[k].name << "[" << i << "]";
      ++checked;
    }
  }
  EXPECT_GT(checked, 30u);
}

}  // namespace
}  // namespace kpn
