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

#include <algorithm>
#include <map>

#include "test_support.hpp"
#include "wspan/dataset.hpp"
#include "wspan/parallel.hpp"
#include "wspan/synth.hpp"

using namespace wspan;

TEST(Synth, DeterministicAndIndependentOfJobsAndCount) {
  SynthConfig a;
  a.images = 5;
  a.seed = 17;
  SynthConfig b = a;
  b.images = 3;
  b.jobs = 3;
  const auto da = synthesize(a), db = synthesize(b);
  ASSERT_EQ(db.samples.size(), 3u);
  for (std::size_t n = 0; n < 3; ++n) {
    EXPECT_EQ(da.samples[n].name, db.samples[n].name);
    EXPECT_EQ(da.samples[n].image, db.samples[n].image);
    EXPECT_EQ(*da.samples[n].truth, *db.samples[n].truth);
  }
  SynthConfig c = a;
  c.seed = 18;
  EXPECT_FALSE(synthesize(c).samples[0].image == da.samples[0].image);
}

TEST(Synth, AnnotationsAreConsistentWithTruth) {
  SynthConfig cfg;
  cfg.images = 8;
  cfg.mix = ClassMix::Voc;
  const auto d = synthesize(cfg);
  EXPECT_EQ(d.classes.catch_all_background(), 0u);
  for (const auto& s : d.samples) {
    const auto& truth = *s.truth;
    const LabelMap sem = semantic_of(truth);
    // Tags are exactly the classes present; one heatmap per tag.
    TagSet present;
    for (Eigen::Index i = 0; i < sem.size(); ++i) present.push_back(sem.data()[i]);
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());
    EXPECT_EQ(s.tags, present);
    ASSERT_EQ(s.heatmaps.size(), s.tags.size());
    // Each box is the tight box of one visible thing instance.
    std::map<std::uint16_t, BoundingBox> tight;
    for (int y = 0; y < truth.height(); ++y)
      for (int x = 0; x < truth.width(); ++x) {
        const auto id = truth.ids(y, x);
        if (!d.classes.is_thing(id / 1000)) continue;
        auto [it, fresh] = tight.try_emplace(id, BoundingBox{x, y, x + 1, y + 1});
        auto& b = it->second;
        b = {std::min(b.x0, x), std::min(b.y0, y), std::max(b.x1, x + 1), std::max(b.y1, y + 1)};
      }
    EXPECT_EQ(s.boxes.size(), tight.size());
    for (const auto& b : s.boxes) {
      EXPECT_TRUE(std::any_of(tight.begin(), tight.end(), [&](const auto& kv) {
        return kv.first / 1000 == b.class_id && kv.second == b.box;
      }));
    }
    for (const auto& det : s.detections) {
      EXPECT_GE(det.score, 0.0);
      EXPECT_LE(det.score, 1.0);
      EXPECT_NO_THROW(det.box.validate(s.image.height, s.image.width));
    }
  }
}

TEST(Dataset, SaveLoadRoundTrip) {
  const auto dir = fixtures::scratch_dir("dataset");
  SynthConfig cfg;
  cfg.images = 3;
  const auto d = synthesize(cfg);
  save_dataset(d, dir);
  const auto back = load_dataset(dir);
  ASSERT_EQ(back.samples.size(), 3u);
  EXPECT_EQ(back.classes.to_json(), d.classes.to_json());
  for (std::size_t n = 0; n < 3; ++n) {
    const auto& a = d.samples[n];
    const auto& b = back.samples[n];
    EXPECT_EQ(a.name, b.name);
    EXPECT_EQ(a.image, b.image);
    EXPECT_EQ(a.tags, b.tags);
    EXPECT_EQ(a.boxes.size(), b.boxes.size());
    EXPECT_EQ(a.detections.size(), b.detections.size());
    ASSERT_TRUE(b.truth.has_value());
    EXPECT_EQ(*a.truth, *b.truth);
    ASSERT_EQ(a.heatmaps.size(), b.heatmaps.size());
    for (std::size_t k = 0; k < a.heatmaps.size(); ++k)
      EXPECT_TRUE((a.heatmaps[k].activation == b.heatmaps[k].activation).all());
  }
  EXPECT_THROW(load_dataset(dir / "nope"), Error);
}

TEST(Parallel, CoversEveryIndexAndRethrowsLowestFailure) {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  try {
    parallel_for(50, 4, [](std::size_t i) {
      if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "7");
  }
}
