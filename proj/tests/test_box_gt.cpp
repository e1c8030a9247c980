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
#include "wspan/box_gt.hpp"
#include "wspan/gmm.hpp"

using namespace wspan;

namespace {

RgbImage square_scene(int size, int x0, int y0, int side, std::uint64_t seed, double noise) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, noise);
  RgbImage img(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const bool in = x >= x0 && x < x0 + side && y >= y0 && y < y0 + side;
      const int base[3] = {in ? 200 : 40, in ? 60 : 90, in ? 50 : 160};
      for (int k = 0; k < 3; ++k)
        img.pixels(y * size + x, k) = std::uint8_t(std::clamp<long>(std::lround(base[k] + n(rng)), 0, 255));
    }
  return img;
}

}  // namespace

TEST(BoundingBox, ValidationAndMask) {
  const BoundingBox b{1, 2, 4, 3};
  EXPECT_EQ(b.area(), 3);
  EXPECT_TRUE(b.contains(3, 2));
  EXPECT_FALSE(b.contains(4, 2));
  const auto m = b.to_mask(4, 5);
  EXPECT_EQ(m.count(), 3);
  EXPECT_THROW((BoundingBox{2, 0, 2, 1}.validate(4, 4)), Error);
  EXPECT_THROW((BoundingBox{0, 0, 5, 1}.validate(4, 4)), Error);
  EXPECT_TRUE((BoundingBox{0, 0, 4, 3}.covers(3, 4)));
}

TEST(BoundingBox, AnnotationJsonRoundTrip) {
  const std::vector<BoxAnnotation> anns{{2, {0, 1, 3, 4}}, {3, {5, 5, 9, 8}}};
  const auto back = parse_annotations(annotations_to_json(anns));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].class_id, 3u);
  EXPECT_EQ(back[1].box, (BoundingBox{5, 5, 9, 8}));
  EXPECT_THROW(parse_annotations("[{\"class_id\": 1}]"), Error);
}

TEST(Gmm, KmeansSeparatesTwoClusters) {
  ColorSamples s(40, 3);
  for (int i = 0; i < 40; ++i) s.row(i) = i < 20 ? Eigen::RowVector3d(0.1, 0.1, 0.1) : Eigen::RowVector3d(0.9, 0.8, 0.9);
  const auto a = kmeans_assign(s, 2, 7);
  for (int i = 1; i < 20; ++i) EXPECT_EQ(a[i], a[0]);
  for (int i = 21; i < 40; ++i) EXPECT_EQ(a[i], a[20]);
  EXPECT_NE(a[0], a[20]);
  EXPECT_EQ(a, kmeans_assign(s, 2, 7));
}

TEST(Gmm, FitRecoversMeansAndWeights) {
  ColorSamples s(30, 3);
  std::vector<int> assign(30);
  for (int i = 0; i < 30; ++i) {
    assign[i] = i < 10 ? 0 : 1;
    s.row(i) = assign[i] == 0 ? Eigen::RowVector3d(0.2 + 0.01 * (i % 3), 0.3, 0.4)
                              : Eigen::RowVector3d(0.8, 0.7 + 0.01 * (i % 2), 0.6);
  }
  GmmColorModel gmm(3);
  gmm.fit(s, assign);
  EXPECT_NEAR(gmm.weights()[0], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(gmm.weights()[1], 2.0 / 3.0, 1e-12);
  EXPECT_EQ(gmm.weights()[2], 0.0);
  EXPECT_NEAR(gmm.means()[1].y(), 0.705, 1e-3);
  EXPECT_EQ(gmm.most_likely_component({0.21, 0.3, 0.4}), 0);
  EXPECT_EQ(gmm.most_likely_component({0.8, 0.7, 0.6}), 1);
  EXPECT_GT(gmm.log_likelihood({0.8, 0.7, 0.6}), gmm.log_likelihood({0.5, 0.5, 0.5}));
}

TEST(GrabCut, RecoversASquare) {
  const auto img = square_scene(48, 14, 16, 18, 1, 8.0);
  BinaryMask truth = BinaryMask::Constant(48, 48, false);
  truth.block(16, 14, 18, 18).setConstant(true);
  const auto fg = grabcut(img, {11, 13, 35, 37});
  EXPECT_GE(mask_iou(fg, truth), 0.95);
  // Nothing outside the box.
  EXPECT_EQ((fg && !BoundingBox{11, 13, 35, 37}.to_mask(48, 48)).count(), 0);
}

TEST(GrabCut, DeterministicAndRejectsFullImageBox) {
  const auto img = square_scene(32, 8, 8, 12, 2, 10.0);
  const BoundingBox box{5, 5, 23, 23};
  EXPECT_TRUE((grabcut(img, box) == grabcut(img, box)).all());
  try {
    grabcut(img, {0, 0, 32, 32});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegenerateBox);
  }
}

TEST(GrabCut, BetaMatchesDefinition) {
  // Two flat halves: only pairs straddling the seam differ.
  const auto img = fixtures::split_image(2, 2, {0, 0, 0}, {255, 0, 0});
  // 8-neighbour pairs in a 2x2 grid: 2 horizontal, 2 vertical, 2 diagonal.
  // Differing pairs: both horizontals and both diagonals, each ||dz||^2 = 1.
  const double mean = 4.0 / 6.0;
  EXPECT_NEAR(grabcut_beta(img), 1.0 / (2.0 * mean), 1e-12);
}

TEST(Proposals, SegmentsFlatRegionsAndSelectsBestBox) {
  const auto img = fixtures::split_image(20, 20, {10, 200, 10}, {200, 10, 10});
  const auto props = generate_proposals(img);
  ASSERT_FALSE(props.empty());
  for (const auto& p : props) EXPECT_GT(p.count(), 0);
  const BoundingBox right{10, 0, 20, 20};
  const auto best = select_proposal(props, right);
  EXPECT_DOUBLE_EQ(mask_iou(props[best], right.to_mask(20, 20)), 1.0);
  EXPECT_EQ(generate_proposals(img).size(), props.size());
  try {
    select_proposal({}, right);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyProposalSet);
  }
}

TEST(MaskIou, Basics) {
  BinaryMask a = BinaryMask::Constant(2, 2, false), b = a;
  EXPECT_EQ(mask_iou(a, b), 0.0);
  a(0, 0) = a(0, 1) = true;
  b(0, 1) = true;
  EXPECT_DOUBLE_EQ(mask_iou(a, b), 0.5);
}

TEST(AgreementMasks, OverlapRulesAndInstances) {
  const auto table = fixtures::road_person_car();
  const std::vector<BoxAnnotation> anns{{2, {0, 0, 3, 1}}, {2, {2, 0, 5, 1}}, {3, {4, 0, 6, 1}}};
  std::vector<BinaryMask> agree(3, BinaryMask::Constant(1, 7, true));
  const auto gt = combine_agreement_masks(1, 7, anns, agree, table, UnclaimedPolicy::Ignore);
  // x: 0 1 -> person#0; 2 -> person (both persons, instance contested);
  // 3 -> person#1; 4 -> person vs car; 5 -> car#0; 6 unclaimed.
  EXPECT_EQ(gt.semantic(0, 0), 2);
  EXPECT_EQ(gt.instances.ids(0, 0), encode_panoptic_id(2, 0));
  EXPECT_EQ(gt.semantic(0, 2), 2);
  EXPECT_EQ(gt.instances.ids(0, 2), kIgnore);
  EXPECT_EQ(gt.instances.ids(0, 3), encode_panoptic_id(2, 1));
  EXPECT_EQ(gt.semantic(0, 4), kIgnore);
  EXPECT_TRUE(gt.claimed(0, 4));
  EXPECT_EQ(gt.instances.ids(0, 5), encode_panoptic_id(3, 0));
  EXPECT_EQ(gt.semantic(0, 6), kIgnore);
  EXPECT_FALSE(gt.claimed(0, 6));
  // Agreement outside the box is ignored.
  EXPECT_EQ(gt.claimed.count(), 6);
}

TEST(AgreementMasks, VocBackgroundFillsUnclaimed) {
  const ClassTable voc({{0, "background", ClassKind::Stuff, {}}, {1, "cat", ClassKind::Thing, {}}});
  const std::vector<BoxAnnotation> anns{{1, {0, 0, 1, 1}}};
  const std::vector<BinaryMask> agree{BinaryMask::Constant(1, 2, true)};
  const auto gt = combine_agreement_masks(1, 2, anns, agree, voc, UnclaimedPolicy::VocBackground);
  EXPECT_EQ(gt.semantic(0, 1), 0);
  EXPECT_EQ(gt.instances.ids(0, 1), encode_panoptic_id(0, 0));
  EXPECT_THROW(combine_agreement_masks(1, 2, anns, agree, fixtures::road_person_car(), UnclaimedPolicy::VocBackground),
               Error);
}

TEST(BoxGt, FabricatesASquareFromOneBox) {
  const auto table = fixtures::road_person_car();
  const auto img = square_scene(40, 12, 10, 14, 3, 6.0);
  const std::vector<BoxAnnotation> anns{{3, {10, 8, 28, 26}}};
  const auto gt = fabricate_box_gt(img, anns, generate_proposals(img), table);
  BinaryMask truth = BinaryMask::Constant(40, 40, false);
  truth.block(10, 12, 14, 14).setConstant(true);
  const BinaryMask got = gt.semantic == 3;
  EXPECT_GE(mask_iou(got, truth), 0.9);
  EXPECT_EQ((gt.semantic != 3 && gt.semantic != kIgnore).count(), 0);
}
