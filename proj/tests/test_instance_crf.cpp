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

#include "test_support.hpp"
#include "wspan/instance_crf.hpp"

using namespace wspan;

namespace {

// 10 x 20 scene: road everywhere except two car squares.
struct TwoCars {
  ClassTable table = fixtures::road_person_car();
  RgbImage image{10, 20};
  SemanticProbMap probs{10, 20, 4, 0.0f};
  PanopticMap truth{10, 20};
  DetectionSet dets{{3, 0.9, {1, 2, 7, 8}, false}, {3, 0.6, {11, 2, 17, 8}, false}};

  TwoCars() {
    for (int y = 0; y < 10; ++y)
      for (int x = 0; x < 20; ++x) {
        const bool left = x >= 2 && x < 6 && y >= 3 && y < 7;
        const bool right = x >= 12 && x < 16 && y >= 3 && y < 7;
        const int i = y * 20 + x;
        // Distinct car colours: with the wide default bilateral window two
        // identical-looking cars would be pulled into one instance.
        const std::uint8_t r = left ? 220 : 60, b = right ? 220 : 60;
        image.pixels.row(i) << r, 60, b;
        probs.values.row(i) << 0.05f, 0.05f, 0.0f, 0.9f;
        if (!left && !right) probs.values.row(i) << 0.9f, 0.05f, 0.0f, 0.05f;
        truth.ids(y, x) = left ? encode_panoptic_id(3, 0) : right ? encode_panoptic_id(3, 1) : encode_panoptic_id(0, 0);
      }
    dets = add_stuff_dummies(dets, std::vector<unsigned>{0}, 10, 20);
  }
};

}  // namespace

TEST(InstanceUnary, BoxGlobalAndCombined) {
  PixelField<double> q(2, 3, 2, 0.0);
  q.values.col(1).setConstant(0.5);
  q.values.col(0).setConstant(0.5);
  const DetectionSet dets{{1, 0.8, {1, 0, 3, 1}, false}};
  const auto b = box_unary(q, dets);
  EXPECT_DOUBLE_EQ(b(0, 1, 0), 0.4);
  EXPECT_DOUBLE_EQ(b(0, 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(b(1, 2, 0), 0.0);
  const auto g = global_unary(q, dets);
  EXPECT_DOUBLE_EQ(g(1, 0, 0), 0.5);
  InstanceCrfConfig cfg;
  cfg.w1 = 2.0;
  cfg.w2 = 0.5;
  const auto u = combined_unary(b, g, cfg);
  EXPECT_NEAR(u(0, 1, 0), -std::log(0.8 + 0.25 + 1e-6), 1e-15);
  EXPECT_NEAR(u(0, 0, 0), -std::log(0.25 + 1e-6), 1e-15);
  const DetectionSet bad{{5, 0.8, {0, 0, 1, 1}, false}};
  EXPECT_THROW(box_unary(q, bad), Error);
}

TEST(InstanceCrf, StuffDummiesAreSortedUniqueAndFullImage) {
  const auto d = add_stuff_dummies({{3, 0.5, {0, 0, 1, 1}, false}}, std::vector<unsigned>{1, 0, 1}, 4, 6);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d[1].label, 0u);
  EXPECT_EQ(d[2].label, 1u);
  EXPECT_TRUE(d[2].is_dummy);
  EXPECT_EQ(d[2].score, 1.0);
  EXPECT_EQ(d[2].box, (BoundingBox{0, 0, 6, 4}));
}

TEST(InstanceCrf, SeparatesTwoCarsOfTheSameClass) {
  const TwoCars s;
  const auto part = partition(s.probs, s.dets, s.image, s.table, InstanceCrfConfig{});
  EXPECT_EQ(part.panoptic, s.truth);
  ASSERT_EQ(part.instances.size(), 3u);
  EXPECT_EQ(part.instances[0].id, encode_panoptic_id(3, 0));
  EXPECT_EQ(part.instances[0].pixels, 16);
  EXPECT_EQ(part.detection_of, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(part.marginals.channels(), 3);
}

TEST(InstanceCrf, PrebuiltKernelGivesTheSamePartition) {
  const TwoCars s;
  const InstanceCrfConfig cfg;
  const auto k = PairwiseKernel<double>::truncated(s.image, cfg.pairwise, truncation_radius(cfg.pairwise));
  EXPECT_EQ(partition(s.probs, s.dets, k, s.table, cfg).panoptic,
            partition(s.probs, s.dets, s.image, s.table, cfg).panoptic);
}

TEST(InstanceCrf, DetectionsWinningNothingGetNoInstanceIndex) {
  TwoCars s;
  // A zero-score duplicate listed first never wins a pixel.
  s.dets.insert(s.dets.begin(), Detection{2, 0.9, {0, 0, 2, 2}, false});
  const auto part = partition(s.probs, s.dets, s.image, s.table, InstanceCrfConfig{});
  EXPECT_EQ(part.panoptic, s.truth);
  EXPECT_EQ(part.detection_of.front(), 1);
}

TEST(InstanceCrf, Errors) {
  const TwoCars s;
  try {
    partition(s.probs, DetectionSet{}, s.image, s.table, InstanceCrfConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NoDetections);
  }
  InstanceCrfConfig cfg;
  cfg.epsilon = 0.0;
  EXPECT_THROW(partition(s.probs, s.dets, s.image, s.table, cfg), Error);
  EXPECT_THROW(partition(s.probs, s.dets, RgbImage(3, 3), s.table, InstanceCrfConfig{}), Error);
}

TEST(ScoreModes, DetectionConfidenceAndOracle) {
  const TwoCars s;
  const auto part = partition(s.probs, s.dets, s.image, s.table, InstanceCrfConfig{});
  const auto det = score_instances(part, s.dets, ScoreMode::Detection);
  EXPECT_EQ(det[0].score, 0.9);
  EXPECT_EQ(det[1].score, 0.6);
  EXPECT_EQ(det[2].score, 1.0);
  const auto conf = score_instances(part, s.dets, ScoreMode::MeanConfidence);
  for (const auto& i : conf) {
    EXPECT_GT(i.score, 0.0);
    EXPECT_LE(i.score, 1.0);
  }
  const auto orc = score_instances(part, s.dets, ScoreMode::Oracle, &s.truth);
  for (const auto& i : orc) EXPECT_DOUBLE_EQ(i.score, 1.0);
  try {
    score_instances(part, s.dets, ScoreMode::Oracle);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingGroundTruth);
  }
  EXPECT_EQ(parse_score_mode(score_mode_name(ScoreMode::MeanConfidence)), ScoreMode::MeanConfidence);
  EXPECT_THROW(parse_score_mode("best"), Error);
}

TEST(DetectionJson, RoundTripSkipsDummiesAndValidatesScores) {
  const TwoCars s;
  const auto back = parse_detections(detections_to_json(s.dets));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].box, s.dets[1].box);
  EXPECT_EQ(back[0].score, 0.9);
  EXPECT_THROW(parse_detections(R"([{"label":1,"score":1.5,"box":[0,0,1,1]}])"), Error);
  EXPECT_THROW(parse_detections(R"([{"label":1,"score":0.5,"box":[0,0,1]}])"), Error);
}
