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

#include "json.hpp"
#include "test_support.hpp"
#include "wspan/dataset.hpp"
#include "wspan/image_io.hpp"
#include "wspan/metrics.hpp"

using namespace wspan;

namespace {

PanopticMap row(std::initializer_list<std::uint16_t> ids) {
  PanopticMap m(1, int(ids.size()));
  int x = 0;
  for (auto v : ids) m.ids(0, x++) = v;
  return m;
}

constexpr std::uint16_t I = kIgnore;

}  // namespace

TEST(SemanticIou, IgnoreHandling) {
  LabelMap gt(1, 6), pred(1, 6);
  gt << 0, 0, 1, 1, I, 1;
  pred << 0, 1, 1, I, 0, 1;
  const auto r = semantic_iou(pred, gt, 3);
  // class 0: inter 1, union {0,1} -> 1/2.  class 1: inter 2, union {1,2,3,5} -> 2/4.
  ASSERT_TRUE(r.per_class[0] && r.per_class[1]);
  EXPECT_DOUBLE_EQ(*r.per_class[0], 0.5);
  EXPECT_DOUBLE_EQ(*r.per_class[1], 0.5);
  EXPECT_FALSE(r.per_class[2].has_value());
  EXPECT_DOUBLE_EQ(r.mean, 0.5);
}

TEST(SemanticIou, AccumulatesOverImagesBeforeDividing) {
  IouAccumulator acc(2);
  LabelMap a(1, 2), b(1, 2);
  a << 0, 0;
  b << 0, 1;
  acc.add(a, a);  // class 0: 2/2
  acc.add(b, a);  // class 0: 1/2, class 1: 0/1
  const auto r = acc.report();
  EXPECT_DOUBLE_EQ(*r.per_class[0], 3.0 / 4.0);
  EXPECT_DOUBLE_EQ(*r.per_class[1], 0.0);
}

TEST(Overlap, IgnorePixelsAndClassesAreRespected) {
  const auto pred = row({1000, 1000, 1001, 2000, 2000});
  const auto gt = row({1000, 1000, I, 2000, 1000});
  const auto o = compute_overlap(pred, gt);
  ASSERT_EQ(o.pred.size(), 2u);  // 1001 lies only on IGNORE and is dropped
  EXPECT_EQ(o.pred[0].area, 2);
  EXPECT_DOUBLE_EQ(o.iou(0, 0), 2.0 / 3.0);
  EXPECT_EQ(o.iou(1, 0), 0.0);  // different class even though they overlap
  EXPECT_EQ(oracle_scores(o), (std::vector<double>{2.0 / 3.0, 0.5}));
}

TEST(Matching, ThresholdIsStrict) {
  const auto pred = row({1000, 1000, 0, 0});
  const auto gt = row({1000, 0, 0, 0});
  const auto m = match_segments(pred, gt);
  // IoU of the thing segments is exactly 0.5: not a match.
  EXPECT_EQ(m.fp.size(), 1u);
  EXPECT_EQ(m.fn.size(), 1u);
  ASSERT_EQ(m.tp.size(), 1u);
  EXPECT_EQ(m.tp[0].class_id, 0u);
}

TEST(Pq, AggregatesSplitThingsAndStuff) {
  const auto table = fixtures::road_person_car();
  const auto pred = row({0, 0, 0, 2000, 2000, 3000});
  const auto gt = row({0, 0, 0, 2000, 2000, 2001});
  const auto r = panoptic_quality(match_segments(pred, gt), &table);
  EXPECT_EQ(r.per_class.size(), 3u);
  EXPECT_DOUBLE_EQ(r.stuff.pq, 1.0);
  // person: TP IoU 1 plus an FN; car: one FP.
  EXPECT_DOUBLE_EQ(r.things.pq, (1.0 / 1.5 + 0.0) / 2.0);
  EXPECT_EQ(r.things.classes, 2);
  EXPECT_DOUBLE_EQ(r.all.pq, (1.0 + 1.0 / 1.5) / 3.0);
  for (const auto& c : r.per_class) EXPECT_NEAR(c.pq, c.sq * c.dq, 1e-15);
}

TEST(Pq, AccumulatorIsOrderIndependent) {
  const auto a = match_segments(row({1000, 1000, 0}), row({1000, 0, 0}));
  const auto b = match_segments(row({1000, 1001, 1001}), row({1000, 1001, 1001}));
  PqAccumulator x, y;
  x.add(a);
  x.add(b);
  y.add(b);
  y.add(a);
  EXPECT_EQ(x.report().all.pq, y.report().all.pq);
}

TEST(Ap, EnvelopeAreaAndRegimes) {
  // TP, FP, TP over 2 gt: precision 1, 1/2, 2/3 -> envelope 1 then 2/3.
  EXPECT_DOUBLE_EQ(average_precision({true, false, true}, 2), 0.5 * 1.0 + 0.5 * 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(average_precision({true}, 4), 0.25);
  EXPECT_EQ(average_precision({}, 3), 0.0);
  const auto voc = regime_thresholds(ApRegime::Voc);
  ASSERT_EQ(voc.size(), 9u);
  EXPECT_DOUBLE_EQ(voc.front(), 0.1);
  const auto cs = regime_thresholds(ApRegime::Cityscapes);
  ASSERT_EQ(cs.size(), 10u);
  EXPECT_DOUBLE_EQ(cs.back(), 0.95);
  EXPECT_EQ(parse_regime("voc"), ApRegime::Voc);
  EXPECT_THROW(parse_regime("coco"), Error);
}

TEST(Ap, RankingUsesScores) {
  InstanceEvalImage im;
  im.overlap = compute_overlap(row({1000, 1000, 1001, 0}), row({1000, 1000, 0, 0}));
  // Ranked first, the FP (1001) costs precision; ranked last it does not.
  im.scores = {0.9, 0.1, 0.0};  // pred order: 0 (stuff), 1000, 1001
  const std::span<const InstanceEvalImage> one(&im, 1);
  const auto low = apr_at_threshold(one, 0.5);
  EXPECT_DOUBLE_EQ(low.at(1), 1.0);
  im.scores = {0.9, 0.1, 0.5};
  const auto high = apr_at_threshold(one, 0.5);
  EXPECT_DOUBLE_EQ(high.at(1), 0.5);
}

TEST(Evaluate, DirectoriesAndJsonReport) {
  const auto dir = fixtures::scratch_dir("evaluate");
  const auto table = fixtures::road_person_car();
  const auto gt = row({0, 0, 2000, 2000, 2001, 1000});
  const auto pred = row({0, 0, 2000, 2000, 1000, 1000});
  write_panoptic_png(gt, dir / "gt" / "a.png");
  write_panoptic_png(pred, dir / "pred" / "a.png");
  write_text(dir / "pred" / "a.json", R"({"instances":[{"id":0,"scores":{"detection":1.0}},{"id":1000,"scores":{"detection":1.0}},{"id":2000,"scores":{"detection":0.7}}]})");
  EvaluationOptions opt;
  const auto r = evaluate_directories(dir / "pred", dir / "gt", table, opt);
  EXPECT_EQ(r.images, 1u);
  ASSERT_TRUE(r.pq && r.apr && r.iou);
  const auto doc = nlohmann::json::parse(report_to_json(r));
  EXPECT_TRUE(doc.contains("pq"));
  EXPECT_TRUE(doc.contains("apr"));
  EXPECT_TRUE(doc.contains("iou"));
  EXPECT_EQ(report_to_json(r), report_to_json(evaluate_directories(dir / "pred", dir / "gt", table, opt)));

  write_panoptic_png(pred, dir / "pred" / "b.png");
  try {
    evaluate_directories(dir / "pred", dir / "gt", table, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingPair);
  }
}

TEST(Evaluate, SemanticInputIsLiftedToPanoptic) {
  const auto table = fixtures::road_person_car();
  LabelMap sem(1, 3);
  sem << 0, 2, 2;
  const std::vector<PanopticMap> gts{row({0, 2000, 2000})};
  const std::vector<PanopticMap> preds{PanopticMap(sem.unaryExpr([](std::uint16_t v) {
    return std::uint16_t(v * 1000);
  }))};
  const std::vector<std::map<std::uint16_t, double>> scores{{}};
  EvaluationOptions opt;
  opt.metrics = {"pq"};
  const auto r = evaluate_pairs(preds, gts, scores, table, opt);
  EXPECT_DOUBLE_EQ(r.pq->all.pq, 1.0);
  EXPECT_FALSE(r.apr.has_value());
}
