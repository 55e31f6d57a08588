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

#include "pgpc/losses.h"

#include <cmath>

#include "fd_checks.h"
#include "gtest/gtest.h"
#include "pgpc/status.h"
#include "test_util.h"

namespace pgpc {
namespace {

using testing::RandomList;
using testing::RandomUnit;

constexpr double kFdTolerance = 1e-5;

TEST(SourceCrossEntropyTest, UnitGapExample) {
  const std::vector<ProbabilityGrid> p = {Softmax(RealGrid(1, 1, 2, {1, 0}))};
  const std::vector<LabelGrid> y = {LabelGrid(1, 1, 2, 0)};
  const auto r = SourceCrossEntropy(p, y, CeReduction::kMean);
  EXPECT_NEAR(r.loss, std::log1p(std::exp(-1.0)), 1e-12);
  EXPECT_NEAR(r.grad_logits[0].data()[0], p[0].probs(0)[0] - 1, 1e-15);
  EXPECT_NEAR(r.grad_logits[0].data()[1], p[0].probs(0)[1], 1e-15);
}

TEST(SourceCrossEntropyTest, ReductionsAndIgnoredPixels) {
  const ProbabilityGrid p(RealGrid(1, 3, 2, {0.5, 0.5, 0.25, 0.75, 0.9, 0.1}));
  LabelGrid y(1, 3, 2);
  y.set(0, 0);
  y.set(1, 1);
  const std::vector<ProbabilityGrid> probs = {p};
  const std::vector<LabelGrid> labels = {y};
  const double expected_sum = -std::log(0.5) - std::log(0.75);
  EXPECT_NEAR(SourceCrossEntropy(probs, labels, CeReduction::kSum).loss,
              expected_sum, 1e-15);
  EXPECT_NEAR(SourceCrossEntropy(probs, labels, CeReduction::kMean).loss,
              expected_sum / 2, 1e-15);
  const auto r = SourceCrossEntropy(probs, labels, CeReduction::kMean);
  EXPECT_EQ(r.grad_logits[0].pixel(2)[0], 0.0);
  EXPECT_EQ(r.grad_logits[0].pixel(2)[1], 0.0);
}

TEST(SourceCrossEntropyTest, AllIgnoredIsZero) {
  const std::vector<ProbabilityGrid> p = {Softmax(RealGrid(2, 2, 3, 0.0))};
  const std::vector<LabelGrid> y = {LabelGrid(2, 2, 3)};
  EXPECT_EQ(SourceCrossEntropy(p, y, CeReduction::kMean).loss, 0.0);
}

TEST(SourceCrossEntropyTest, FiniteDifferences) {
  Rng rng(51);
  for (int t = 0; t < 100; ++t) {
    EXPECT_LE(testing::SourceCrossEntropyFdError(rng), kFdTolerance);
  }
}

TEST(TargetCrossEntropyTest, QualityScalesTheLoss) {
  Rng rng(52);
  const std::vector<ProbabilityGrid> p = {
      testing::RandomProbabilities(3, 3, 4, rng)};
  std::vector<PseudoLabelResult> pseudo(1);
  pseudo[0].labels = PseudoLabels(testing::RandomProbabilities(3, 3, 4, rng));
  pseudo[0].quality = 1.0;
  const double full = TargetCrossEntropy(p, pseudo, CeReduction::kMean).loss;
  pseudo[0].quality = 0.25;
  EXPECT_NEAR(TargetCrossEntropy(p, pseudo, CeReduction::kMean).loss,
              0.25 * full, 1e-15);
  pseudo[0].quality = 0.0;
  const auto zero = TargetCrossEntropy(p, pseudo, CeReduction::kMean);
  EXPECT_EQ(zero.loss, 0.0);
  for (double g : zero.grad_logits[0].data()) EXPECT_EQ(g, 0.0);
}

TEST(TargetCrossEntropyTest, FiniteDifferences) {
  Rng rng(53);
  for (int t = 0; t < 100; ++t) {
    EXPECT_LE(testing::TargetCrossEntropyFdError(rng), kFdTolerance);
  }
}

TEST(InfoNceAnchorTermTest, SymmetricCaseIsLogOnePlusN) {
  // Anchor orthogonal to the positive and every negative.
  const std::vector<double> anchor = {1, 0, 0};
  const std::vector<double> positive = {0, 1, 0};
  EmbeddingList negatives(3);
  for (int i = 0; i < 5; ++i) {
    negatives.Add(std::vector<double>{0, i % 2 ? 1.0 : -1.0, 0}, {});
  }
  for (int n = 1; n <= 5; ++n) {
    std::vector<int> index(n);
    for (int k = 0; k < n; ++k) index[k] = k;
    EXPECT_NEAR(InfoNceAnchorTerm(anchor, positive, negatives, index, 0.5, {}),
                std::log(1.0 + n), 1e-9);
  }
}

TEST(InfoNceAnchorTermTest, OppositeNegativeExample) {
  const std::vector<double> anchor = {1, 0};
  const std::vector<double> positive = {1, 0};
  EmbeddingList negatives(2);
  negatives.Add(std::vector<double>{-1, 0}, {});
  const std::vector<int> index = {0};
  const double term =
      InfoNceAnchorTerm(anchor, positive, negatives, index, 0.5, {});
  EXPECT_NEAR(term, std::log1p(std::exp(-4.0)), 1e-9);
  EXPECT_NEAR(term, 0.01815, 1e-5);
}

TEST(InfoNceAnchorTermTest, BoundsHold) {
  Rng rng(54);
  for (int t = 0; t < 500; ++t) {
    const int dim = 2 + t % 7;
    const int n = 1 + t % 8;
    const double tau = 0.1 + 0.1 * (t % 10);
    const EmbeddingList negatives = RandomList(n, dim, rng);
    std::vector<int> index(n);
    for (int k = 0; k < n; ++k) index[k] = k;
    const double term = InfoNceAnchorTerm(RandomUnit(dim, rng),
                                          RandomUnit(dim, rng), negatives,
                                          index, tau, {});
    EXPECT_GE(term, std::log1p(n * std::exp(-2.0 / tau)) - 1e-12);
    EXPECT_LE(term, std::log1p(n * std::exp(2.0 / tau)) + 1e-12);
  }
}

TEST(InfoNceAnchorTermTest, DecreasesAsThePositiveMovesCloser) {
  Rng rng(55);
  const EmbeddingList negatives = RandomList(6, 2, rng);
  const std::vector<int> index = {0, 1, 2, 3, 4, 5};
  const std::vector<double> anchor = {1, 0};
  double previous = INFINITY;
  for (int step = 0; step <= 20; ++step) {
    const double angle = M_PI * (1.0 - step / 20.0);
    const std::vector<double> positive = {std::cos(angle), std::sin(angle)};
    const double term =
        InfoNceAnchorTerm(anchor, positive, negatives, index, 0.5, {});
    EXPECT_LT(term, previous);
    previous = term;
  }
}

TEST(InfoNceAnchorTermTest, LargeSimilaritiesStayFinite) {
  const std::vector<double> anchor = {1, 0};
  EmbeddingList negatives(2);
  negatives.Add(std::vector<double>{1, 0}, {});
  const std::vector<int> index = {0};
  std::vector<double> grad(2);
  const double term = InfoNceAnchorTerm(anchor, std::vector<double>{-1, 0},
                                        negatives, index, 1e-3, grad);
  EXPECT_NEAR(term, 2000.0, 1e-9);
  EXPECT_TRUE(std::isfinite(grad[0]));
}

TEST(InfoNceTest, FiniteDifferences) {
  Rng rng(56);
  for (int t = 0; t < 100; ++t) {
    EXPECT_LE(testing::InfoNceFdError(rng), kFdTolerance);
  }
}

TEST(InfoNceTest, MeanOverRealizedAnchors) {
  Rng rng(57);
  const testing::InfoNceInstance inst = testing::RandomInfoNceInstance(rng);
  const SampleBatch batch = inst.Build();
  const InfoNceResult r = InfoNce(batch, inst.tau, inst.classes);
  double sum = 0;
  int anchors = 0;
  for (const ClassSamples& s : batch.classes) {
    std::vector<double> positive = s.prototype;
    const double norm = std::sqrt(Dot(positive, positive));
    for (double& x : positive) x /= norm;
    for (int m = 0; m < s.anchors.size(); ++m) {
      sum += InfoNceAnchorTerm(s.anchors.row(m), positive, s.negatives,
                               s.negative_index[m], inst.tau, {});
      ++anchors;
    }
  }
  EXPECT_EQ(r.anchors_used, anchors);
  EXPECT_NEAR(r.loss, sum / anchors, 1e-12);
  double per_class_sum = 0;
  for (double v : r.per_class) per_class_sum += v;
  EXPECT_NEAR(per_class_sum, r.loss, 1e-12);
}

TEST(InfoNceTest, EmptyBatchAndSkips) {
  SampleBatch batch;
  batch.skipped_classes = 2;
  ClassSamples no_negatives;
  no_negatives.cls = 1;
  no_negatives.anchors = EmbeddingList(2);
  no_negatives.anchors.Add(std::vector<double>{1, 0}, {});
  no_negatives.prototype = {1, 0};
  no_negatives.negative_index = {{}};
  batch.classes.push_back(no_negatives);
  const InfoNceResult r = InfoNce(batch, 0.5, 3);
  EXPECT_EQ(r.loss, 0.0);
  EXPECT_EQ(r.anchors_used, 0);
  EXPECT_EQ(r.skipped_classes, 3);
  EXPECT_THROW(InfoNce(batch, 0.0, 3), Error);
}

TEST(InfoNceTest, GradientsAreReportedForAnchorsOnly) {
  Rng rng(58);
  const testing::InfoNceInstance inst = testing::RandomInfoNceInstance(rng);
  const InfoNceResult r = InfoNce(inst.Build(), inst.tau, inst.classes);
  ASSERT_EQ(r.anchor_grad.size(), inst.templates.size());
  for (size_t k = 0; k < inst.templates.size(); ++k) {
    EXPECT_EQ(r.anchor_grad[k].size(), inst.anchor_values[k].size());
  }
}

TEST(ContrastiveActiveTest, WarmupAndWeightGate) {
  PgpcConfig c;
  c.warmup_iters = 10;
  EXPECT_FALSE(ContrastiveActive(c, 0));
  EXPECT_FALSE(ContrastiveActive(c, 10));
  EXPECT_TRUE(ContrastiveActive(c, 11));
  c.lambda_c = 0;
  EXPECT_FALSE(ContrastiveActive(c, 11));
}

TEST(TotalLossTest, Example) {
  PgpcConfig c;
  c.lambda_t = 1.0;
  c.lambda_c = 0.1;
  c.warmup_iters = 0;
  EXPECT_NEAR(TotalLoss(1.0, 0.5, 2.0, c, 1), 1.7, 1e-15);
  c.warmup_iters = 5;
  EXPECT_NEAR(TotalLoss(1.0, 0.5, 2.0, c, 3), 1.5, 1e-15);
}

}  // namespace
}  // namespace pgpc
