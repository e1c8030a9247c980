/* Copyright 2026 The wspan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"
#include "wspan/dense_crf.hpp"

using namespace wspan;

namespace {

LabelField<double> random_unary(int h, int w, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  LabelField<double> out(h, w, d);
  for (Eigen::Index i = 0; i < out.values.size(); ++i) out.values.data()[i] = u(rng);
  return out;
}

}  // namespace

TEST(Kernel, ValueFollowsTheTwoGaussians) {
  RgbImage img(1, 2);
  img.pixels << 0, 0, 0, 30, 40, 0;  // colour distance 50
  const PairwiseConfig cfg{2.0, 1.0, 5.0, 4.0, 10.0};
  const double expected = 2.0 * std::exp(-1.0 / 2.0) + 5.0 * std::exp(-1.0 / 32.0 - 2500.0 / 200.0);
  EXPECT_NEAR(kernel_value<double>(cfg, img, 0, 1), expected, 1e-15);
}

TEST(Kernel, TruncatedIsSymmetricWithZeroDiagonal) {
  const auto img = fixtures::noise_image(6, 5, 1);
  const PairwiseConfig cfg{3.0, 1.0, 10.0, 2.0, 20.0};
  const auto k = PairwiseKernel<double>::truncated(img, cfg, 3);
  const Eigen::MatrixXd m = k.matrix();
  EXPECT_TRUE(m.isApprox(m.transpose()));
  EXPECT_EQ(m.diagonal().cwiseAbs().maxCoeff(), 0.0);
  // Outside the window entries are absent.
  EXPECT_EQ(m(0, 4), 0.0);  // dx = 4 > 3
  EXPECT_NEAR(m(0, 1), kernel_value<double>(cfg, img, 0, 1), 1e-15);
}

TEST(Kernel, FullMatchesPairwiseDefinition) {
  const auto img = fixtures::noise_image(3, 4, 2);
  const PairwiseConfig cfg;
  const Eigen::MatrixXd m = PairwiseKernel<double>::full(img, cfg).matrix();
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j)
      if (i != j) {
        EXPECT_NEAR(m(i, j), kernel_value<double>(cfg, img, i, j), 1e-15);
      }
}

TEST(Kernel, PottsCostMatchesDenseProduct) {
  Eigen::MatrixXd a(3, 3);
  a << 0, 1, 2, 1, 0, 3, 2, 3, 0;
  const auto k = PairwiseKernel<double>::from_dense(a);
  LabelField<double>::Matrix q(3, 2);
  q << 0.2, 0.8, 0.5, 0.5, 1.0, 0.0;
  const LabelField<double>::Matrix ones = LabelField<double>::Matrix::Ones(3, 2);
  const LabelField<double>::Matrix expected = a * (ones - q);
  EXPECT_TRUE(k.potts_cost(q).isApprox(expected, 1e-14));
}

TEST(Truncation, RadiusScalesWithLargestBandwidth) {
  const PairwiseConfig cfg{3.0, 2.0, 10.0, 1.5, 10.0};
  EXPECT_EQ(truncation_radius(cfg), 12);
  EXPECT_EQ(truncation_radius(cfg, 3.0), 6);
}

TEST(Meanfield, ZeroIterationsIsSoftmaxOfNegativeUnary) {
  LabelField<double> u(1, 1, 3);
  u.values << 0.0, std::log(2.0), std::log(4.0);
  const auto q = init_marginals(u);
  EXPECT_NEAR(q.values(0, 0), 4.0 / 7.0, 1e-15);
  EXPECT_NEAR(q.values(0, 2), 1.0 / 7.0, 1e-15);
  const auto img = fixtures::noise_image(1, 1, 0);
  EXPECT_TRUE(run_meanfield(u, PairwiseConfig{}, img, 0).values.isApprox(q.values));
}

TEST(Meanfield, MarginalsStayOnTheSimplex) {
  const auto img = fixtures::noise_image(8, 9, 3);
  const auto u = random_unary(8, 9, 4, 3);
  const auto q = run_meanfield(u, PairwiseConfig{}, img, 10);
  EXPECT_TRUE(q.values.allFinite());
  EXPECT_GE(q.values.minCoeff(), 0.0);
  EXPECT_NEAR((q.values.rowwise().sum().array() - 1.0).abs().maxCoeff(), 0.0, 1e-12);
}

TEST(Meanfield, StepAgreesWithExactStepOnFullKernel) {
  const auto img = fixtures::noise_image(4, 5, 4);
  const auto u = random_unary(4, 5, 3, 4);
  const PairwiseConfig cfg{3.0, 2.0, 8.0, 3.0, 30.0};
  const auto k = PairwiseKernel<double>::full(img, cfg);
  auto q = init_marginals(u);
  for (int it = 0; it < 4; ++it) {
    const auto fast = meanfield_step(q, u, k);
    const auto slow = meanfield_step_exact(q, u, cfg, img);
    EXPECT_LT((fast.values - slow.values).cwiseAbs().maxCoeff(), 1e-12);
    q = fast;
  }
}

TEST(Meanfield, FloatAndDoubleAgree) {
  const auto img = fixtures::noise_image(10, 10, 5);
  const auto u = random_unary(10, 10, 3, 5);
  const PairwiseConfig cfg{3.0, 1.0, 10.0, 2.0, 15.0};
  const auto qd = run_meanfield(u, cfg, img, 5);
  const auto qf = run_meanfield(u.cast<float>(), cfg, img, 5);
  EXPECT_LT((qd.values.cast<float>() - qf.values).cwiseAbs().maxCoeff(), 1e-4f);
}

TEST(Meanfield, StrongSmoothingFillsANoisyPixel) {
  // One pixel weakly prefers label 1 in a field that prefers label 0.
  const auto img = fixtures::split_image(5, 5, {100, 100, 100}, {100, 100, 100});
  LabelField<double> u(5, 5, 2);
  for (Eigen::Index i = 0; i < 25; ++i) u.values.row(i) << 0.0, 2.0;
  u.values.row(12) << 0.5, 0.0;
  const auto labels = map_labeling(run_meanfield(u, PairwiseConfig{}, img, 5));
  EXPECT_TRUE((labels == 0).all());
}

TEST(Energy, KernelAndConfigFormsAgreeAndBruteForceIsMinimal) {
  const auto img = fixtures::noise_image(2, 3, 6);
  const auto u = random_unary(2, 3, 3, 6);
  const PairwiseConfig cfg;
  const auto k = PairwiseKernel<double>::full(img, cfg);
  const auto best = brute_force_map(u, cfg, img);
  const double e_best = energy(best, u, cfg, img);
  EXPECT_NEAR(energy(best, u, k), e_best, 1e-12);
  std::mt19937_64 rng(9);
  for (int t = 0; t < 50; ++t) {
    LabelMap l(2, 3);
    for (Eigen::Index i = 0; i < 6; ++i) l.data()[i] = std::uint16_t(rng() % 3);
    EXPECT_GE(energy(l, u, cfg, img), e_best - 1e-12);
  }
}

TEST(Energy, ErrorsAreTyped) {
  const auto img = fixtures::noise_image(4, 4, 7);
  const auto u = random_unary(4, 4, 3, 7);
  EXPECT_NO_THROW(brute_force_map(random_unary(2, 4, 3, 1), PairwiseConfig{}, fixtures::noise_image(2, 4, 1)));
  try {
    brute_force_map(u, PairwiseConfig{}, img);  // 3^16 > 10^6
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TooLarge);
  }
  EXPECT_THROW(run_meanfield(u, PairwiseConfig{}, fixtures::noise_image(3, 4, 1), 1), Error);
  EXPECT_THROW(run_meanfield(u, PairwiseConfig{1.0, -1.0, 1.0, 1.0, 1.0}, img, 1), Error);
  auto bad = u;
  bad.values(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(init_marginals(bad), Error);
}
