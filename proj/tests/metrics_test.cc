/* Copyright 2026 The PGPC Authors. All Rights Reserved.

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

#include "pgpc/metrics.h"

#include "gtest/gtest.h"
#include "pgpc/status.h"
#include "test_util.h"

namespace pgpc {
namespace {

LabelGrid Columns(const std::vector<int>& column_class) {
  LabelGrid labels(4, 4, 2);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) labels.set(r * 4 + c, column_class[c]);
  }
  return labels;
}

TEST(ComputeIouTest, PerfectPrediction) {
  Rng rng(61);
  const std::vector<LabelGrid> truth = {testing::RandomLabels(4, 4, 3, rng),
                                        testing::RandomLabels(4, 4, 3, rng)};
  const IouResult r = ComputeIou(truth, truth, 3);
  EXPECT_EQ(r.miou, 1.0);
}

TEST(ComputeIouTest, ComplementOnTwoClasses) {
  const std::vector<LabelGrid> truth = {Columns({0, 0, 1, 1})};
  const std::vector<LabelGrid> predicted = {Columns({1, 1, 0, 0})};
  EXPECT_EQ(ComputeIou(predicted, truth, 2).miou, 0.0);
}

TEST(ComputeIouTest, HalfOverlappingRegions) {
  // Truth: class 1 in columns 0-1. Prediction: class 1 in columns 1-2.
  const std::vector<LabelGrid> truth = {Columns({1, 1, 0, 0})};
  const std::vector<LabelGrid> predicted = {Columns({0, 1, 1, 0})};
  const IouResult r = ComputeIou(predicted, truth, 2);
  EXPECT_EQ(r.true_positives[1], 4);
  EXPECT_EQ(r.false_positives[1], 4);
  EXPECT_EQ(r.false_negatives[1], 4);
  EXPECT_DOUBLE_EQ(*r.per_class_iou[1], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.miou, 1.0 / 3.0);
}

TEST(ComputeIouTest, AbsentClassIsExcludedAndIgnoreIsSkipped) {
  LabelGrid truth(1, 4, 3, std::vector<int32_t>{0, 0, kIgnoreLabel, 1});
  LabelGrid predicted(1, 4, 3, std::vector<int32_t>{0, 0, 2, 1});
  const IouResult r = ComputeIou(std::vector<LabelGrid>{predicted},
                                 std::vector<LabelGrid>{truth}, 3);
  EXPECT_FALSE(r.per_class_iou[2].has_value());
  EXPECT_EQ(r.false_positives[2], 0);
  EXPECT_EQ(r.miou, 1.0);
}

TEST(ComputeIouTest, CountsAccumulateOverImages) {
  // Per-image means would give (1 + 0.5) / 2; dataset counts give 2/3.
  const std::vector<LabelGrid> truth = {LabelGrid(1, 2, 2, {0, 0}),
                                        LabelGrid(1, 2, 2, {0, 0})};
  const std::vector<LabelGrid> predicted = {LabelGrid(1, 2, 2, {0, 0}),
                                            LabelGrid(1, 2, 2, {0, 1})};
  const IouResult r = ComputeIou(predicted, truth, 2);
  EXPECT_DOUBLE_EQ(*r.per_class_iou[0], 3.0 / 4.0);
  EXPECT_FALSE(r.per_class_iou[1].has_value());
}

TEST(ComputeIouTest, ShapeMismatchThrows) {
  const std::vector<LabelGrid> a = {LabelGrid(2, 2, 2, 0)};
  const std::vector<LabelGrid> b = {LabelGrid(1, 2, 2, 0)};
  EXPECT_THROW(ComputeIou(a, b, 2), Error);
  EXPECT_THROW(ComputeIou(a, std::vector<LabelGrid>{}, 2), Error);
}

}  // namespace
}  // namespace pgpc
