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
#include "wspan/label_model.hpp"

using namespace wspan;

TEST(PanopticId, RoundTripsOverTheWholeRange) {
  for (unsigned c = 0; c <= kMaxClassId; c += 7)
    for (unsigned i : {0u, 1u, 500u, 999u}) {
      const auto id = encode_panoptic_id(c, i);
      EXPECT_EQ(id, c * 1000 + i);
      EXPECT_EQ(decode_panoptic_id(id), (PanopticId{c, i}));
    }
}

TEST(PanopticId, RejectsOutOfRange) {
  EXPECT_THROW(encode_panoptic_id(kMaxClassId + 1, 0), Error);
  EXPECT_THROW(encode_panoptic_id(1, 1000), Error);
  try {
    decode_panoptic_id(kIgnore);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::IgnoreSentinel);
  }
}

TEST(PanopticId, SemanticProjectionKeepsIgnore) {
  PanopticMap p(1, 3);
  p.ids << encode_panoptic_id(2, 4), kIgnore, encode_panoptic_id(0, 0);
  const LabelMap s = semantic_of(p);
  EXPECT_EQ(s(0, 0), 2);
  EXPECT_EQ(s(0, 1), kIgnore);
  EXPECT_EQ(s(0, 2), 0);
}

TEST(ClassTable, JsonRoundTrip) {
  const auto table = fixtures::road_person_car();
  const auto back = ClassTable::parse(table.to_json());
  ASSERT_EQ(back.size(), 4u);
  EXPECT_EQ(back.at(2).name, "person");
  EXPECT_TRUE(back.is_thing(3));
  EXPECT_TRUE(back.is_stuff(1));
  EXPECT_EQ(back.thing_ids(), (std::vector<unsigned>{2, 3}));
  EXPECT_EQ(back.stuff_ids(), (std::vector<unsigned>{0, 1}));
  EXPECT_FALSE(back.catch_all_background().has_value());
}

TEST(ClassTable, RejectsNonContiguousIds) {
  EXPECT_THROW(ClassTable({{0, "a", ClassKind::Stuff, {}}, {2, "b", ClassKind::Thing, {}}}), Error);
  EXPECT_THROW(ClassTable::parse("not json"), Error);
}

TEST(ClassTable, SoleStuffClassIsBackground) {
  const ClassTable voc({{0, "background", ClassKind::Stuff, {}}, {1, "cat", ClassKind::Thing, {}}});
  EXPECT_EQ(voc.catch_all_background(), 0u);
}

TEST(Validation, LabelsAndProbabilities) {
  const auto table = fixtures::road_person_car();
  LabelMap ok(1, 2);
  ok << 3, kIgnore;
  EXPECT_NO_THROW(validate_labels(ok, table));
  LabelMap bad(1, 1);
  bad << 9;
  EXPECT_THROW(validate_labels(bad, table), Error);

  SemanticProbMap p(1, 2, 2, 0.5f);
  EXPECT_NO_THROW(validate_probabilities(p));
  p.values(0, 0) = 0.7f;
  EXPECT_THROW(validate_probabilities(p), Error);
  p.values(0, 0) = std::nanf("");
  EXPECT_THROW(validate_probabilities(p), Error);
}
