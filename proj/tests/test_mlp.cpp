/*
 * Copyright 2026 The imbench Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include "imb/mlp.hpp"
#include "test_util.hpp"

using namespace imb;

namespace {

// 0.5 * ||f(x) - target||^2 summed over a few fixed inputs.
double regression_loss(const Mlp& net, Mlp* grad) {
  const std::vector<std::vector<double>> xs = {{0.3, -1.2, 0.7}, {1.5, 0.1, -0.4}, {-0.8, 0.9, 2.0}};
  const std::vector<std::vector<double>> ts = {{1.0, -0.5}, {0.0, 0.25}, {-1.0, 2.0}};
  double loss = 0.0;
  Mlp::Cache cache;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto out = net.forward(xs[i], cache);
    std::vector<double> g(out.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
      g[k] = out[k] - ts[i][k];
      loss += 0.5 * g[k] * g[k];
    }
    if (grad) net.backward(cache, g, *grad);
  }
  return loss;
}

}  // namespace

TEST(Mlp, ShapesAndParameterCount) {
  Rng rng(1);
  Mlp net({3, 5, 2}, {Activation::kTanh, Activation::kLinear}, rng);
  EXPECT_EQ(net.input_width(), 3u);
  EXPECT_EQ(net.output_width(), 2u);
  EXPECT_EQ(net.parameter_count(), 3u * 5 + 5 + 5 * 2 + 2);
  EXPECT_EQ(net.forward(std::vector<double>{1, 2, 3}).size(), 2u);
  EXPECT_THROW(net.forward(std::vector<double>{1, 2}), std::invalid_argument);
  EXPECT_THROW(Mlp({3}, {}, rng), std::invalid_argument);
}

TEST(Mlp, ZeroWeightsGiveBiasOutput) {
  Rng rng(2);
  Mlp net({2, 2}, {Activation::kSigmoid}, rng);
  net.fill(0.0);
  const auto out = net.forward(std::vector<double>{5, -3});
  EXPECT_DOUBLE_EQ(out[0], 0.5);
  EXPECT_DOUBLE_EQ(out[1], 0.5);
}

class MlpGradient : public ::testing::TestWithParam<Activation> {};

TEST_P(MlpGradient, MatchesCentralDifference) {
  Rng rng(3);
  Mlp net({3, 4, 4, 2}, {GetParam(), GetParam(), Activation::kLinear}, rng);
  for (std::size_t i = 0; i < net.parameter_count(); ++i) net.parameter(i) += 0.05;
  Mlp grad = net.zeros_like();
  regression_loss(net, &grad);
  const double err = fixtures::max_gradient_error(net, grad, [&] { return regression_loss(net, nullptr); });
  EXPECT_LT(err, 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Activations, MlpGradient,
                         ::testing::Values(Activation::kTanh, Activation::kSigmoid, Activation::kRelu));

TEST(Mlp, SgdReducesLoss) {
  Rng rng(4);
  Mlp net({3, 8, 2}, {Activation::kTanh, Activation::kLinear}, rng);
  const double before = regression_loss(net, nullptr);
  for (int it = 0; it < 200; ++it) {
    Mlp grad = net.zeros_like();
    regression_loss(net, &grad);
    Mlp* nets[] = {&net};
    Mlp* grads[] = {&grad};
    sgd_step(nets, grads, 0.05);
  }
  EXPECT_LT(regression_loss(net, nullptr), 0.5 * before);
}

TEST(Mlp, GradientClipBoundsStep) {
  Rng rng(5);
  Mlp net({2, 2}, {Activation::kLinear}, rng);
  const Mlp start = net;
  Mlp grad = net.zeros_like();
  grad.fill(100.0);
  Mlp* nets[] = {&net};
  Mlp* grads[] = {&grad};
  sgd_step(nets, grads, 1.0, 5.0);
  double moved = 0.0;
  for (std::size_t i = 0; i < net.parameter_count(); ++i) moved += std::pow(net.parameter(i) - start.parameter(i), 2);
  EXPECT_NEAR(std::sqrt(moved), 5.0, 1e-9);
}
