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

#include "pgpc/pseudo_labeler.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gtest/gtest.h"
#include "pgpc/status.h"
#include "test_util.h"

namespace pgpc {
namespace {

// Rows with the given max probability spread evenly over the other classes.
ProbabilityGrid PeakedRows(const std::vector<double>& peaks, int classes) {
  RealGrid grid(1, static_cast<int>(peaks.size()), classes);
  for (size_t j = 0; j < peaks.size(); ++j) {
    auto row = grid.pixel(static_cast<int>(j));
    for (int c = 0; c < classes; ++c) {
      row[c] = c == 0 ? peaks[j] : (1.0 - peaks[j]) / (classes - 1);
    }
  }
  return ProbabilityGrid(grid);
}

// Sort-and-take oracle: stable sort of pixel indices by entropy.
std::vector<bool> OracleMask(const std::vector<double>& entropy, double eta) {
  std::vector<int> order(entropy.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return entropy[a] < entropy[b]; });
  const size_t k = std::lround(eta * entropy.size());
  std::vector<bool> mask(entropy.size(), false);
  for (size_t i = 0; i < k; ++i) mask[order[i]] = true;
  return mask;
}

TEST(PseudoLabelsTest, Examples) {
  const ProbabilityGrid p(RealGrid(1, 2, 3, {0.2, 0.3, 0.5, 1 / 3.0, 1 / 3.0,
                                             1 / 3.0}));
  const LabelGrid labels = PseudoLabels(p);
  EXPECT_EQ(labels.at(0), 2);
  EXPECT_EQ(labels.at(1), 0);
}

TEST(PseudoLabelsTest, MatchesBruteForceArgmax) {
  Rng rng(1);
  const ProbabilityGrid p = testing::RandomProbabilities(3, 3, 4, rng);
  const LabelGrid labels = PseudoLabels(p);
  for (int j = 0; j < 9; ++j) {
    const auto row = p.probs(j);
    int best = 0;
    for (int c = 1; c < 4; ++c) {
      if (row[c] > row[best]) best = c;
    }
    EXPECT_EQ(labels.at(j), best);
  }
}

TEST(QualityWeightTest, Examples) {
  EXPECT_EQ(QualityWeight(PeakedRows({0.99, 0.99, 0.99}, 3), 0.968), 1.0);
  EXPECT_EQ(QualityWeight(PeakedRows({0.5, 0.9, 0.6}, 3), 0.968), 0.0);
  EXPECT_EQ(QualityWeight(PeakedRows({0.97, 0.99, 0.5, 0.98}, 3), 0.968), 0.75);
}

TEST(QualityWeightTest, ThresholdIsStrict) {
  EXPECT_EQ(QualityWeight(PeakedRows({0.75, 0.75}, 2), 0.75), 0.0);
}

TEST(QualityWeightTest, NonIncreasingInKappa) {
  Rng rng(2);
  const ProbabilityGrid p = testing::RandomProbabilities(8, 8, 5, rng, 4.0);
  double previous = 1.0;
  for (double kappa = 0.05; kappa < 1.0; kappa += 0.05) {
    const double q = QualityWeight(p, kappa);
    EXPECT_LE(q, previous);
    EXPECT_GE(q, 0.0);
    previous = q;
  }
}

TEST(EntropyMapTest, Examples) {
  const ProbabilityGrid p(
      RealGrid(1, 3, 2, {1.0, 0.0, 0.5, 0.5, 0.7, 0.3}));
  const std::vector<double> e = EntropyMap(p);
  EXPECT_EQ(e[0], 0.0);
  EXPECT_NEAR(e[1], 0.6931, 1e-4);
  EXPECT_NEAR(e[1], std::log(2.0), 1e-15);
  EXPECT_NEAR(e[2], 0.6109, 1e-4);
}

TEST(EntropyMapTest, MatchesSummationOracleAndBounds) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const ProbabilityGrid p = testing::RandomProbabilities(6, 6, 5, rng, 3.0);
    const std::vector<double> e = EntropyMap(p);
    for (int j = 0; j < p.pixels(); ++j) {
      double oracle = 0.0;
      for (double v : p.probs(j)) {
        if (v > 0) oracle -= v * std::log(v);
      }
      EXPECT_NEAR(e[j], oracle, 1e-12);
      EXPECT_GE(e[j], 0.0);
      EXPECT_LE(e[j], std::log(5.0) + 1e-12);
    }
  }
}

TEST(ReliableMaskTest, Examples) {
  const ReliableSelection all = ReliableMask({0.3, 0.1, 0.2}, 1.0);
  EXPECT_EQ(all.selected, 3);
  EXPECT_EQ(all.mask, (std::vector<bool>{true, true, true}));
  EXPECT_EQ(all.gamma, 0.3);

  const ReliableSelection half = ReliableMask({0.1, 0.9, 0.2, 0.8}, 0.5);
  EXPECT_EQ(half.mask, (std::vector<bool>{true, false, true, false}));
  EXPECT_EQ(half.gamma, 0.2);

  const ReliableSelection ties = ReliableMask({0.4, 0.4, 0.4, 0.4}, 0.5);
  EXPECT_EQ(ties.mask, (std::vector<bool>{true, true, false, false}));
}

TEST(ReliableMaskTest, Errors) {
  EXPECT_THROW(ReliableMask({}, 0.5), Error);
  EXPECT_THROW(ReliableMask({0.1}, 0.0), Error);
  EXPECT_THROW(ReliableMask({0.1}, 1.5), Error);
}

TEST(ReliableMaskTest, CountRoundingAndOracle) {
  EXPECT_EQ(ReliableCount(256, 0.5), 128);
  EXPECT_EQ(ReliableCount(10, 0.25), 3);  // 2.5 rounds away from zero
  EXPECT_EQ(ReliableCount(64, 0.4), 26);
  Rng rng(4);
  std::uniform_int_distribution<int> level(0, 6);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> entropy(37);
    // Coarse levels force many ties.
    for (double& e : entropy) e = 0.1 * level(rng);
    for (double eta : {0.2, 0.4, 0.5, 0.6, 1.0}) {
      const ReliableSelection s = ReliableMask(entropy, eta);
      EXPECT_EQ(s.mask, OracleMask(entropy, eta));
      EXPECT_EQ(s.selected, ReliableCount(37, eta));
    }
  }
}

TEST(ReliableMaskTest, ShiftedLogitsKeepTheMask) {
  Rng rng(5);
  const RealGrid logits = testing::RandomGrid(8, 8, 5, rng, 2.0);
  RealGrid shifted = logits;
  for (double& x : shifted.mutable_data()) x += 3.0;
  const auto a = ReliableMask(EntropyMap(Softmax(logits)), 0.5);
  const auto b = ReliableMask(EntropyMap(Softmax(shifted)), 0.5);
  EXPECT_EQ(a.mask, b.mask);
}

TEST(SelectReliableTest, GlobalEntropyMatchesReliableMask) {
  Rng rng(6);
  const ProbabilityGrid p = testing::RandomProbabilities(8, 8, 5, rng);
  const LabelGrid labels = PseudoLabels(p);
  const std::vector<double> e = EntropyMap(p);
  const auto s =
      SelectReliable(p, labels, e, 0.5, SelectionStrategy::kGlobalEntropy);
  EXPECT_EQ(s.mask, ReliableMask(e, 0.5).mask);
}

TEST(SelectReliableTest, GlobalConfidencePicksHighestMaxProbability) {
  const ProbabilityGrid p = PeakedRows({0.5, 0.9, 0.6, 0.95}, 3);
  const LabelGrid labels = PseudoLabels(p);
  const auto s = SelectReliable(p, labels, EntropyMap(p), 0.5,
                                SelectionStrategy::kGlobalConfidence);
  EXPECT_EQ(s.mask, (std::vector<bool>{false, true, false, true}));
  EXPECT_EQ(s.gamma, 0.9);
}

TEST(SelectReliableTest, ClasswiseSelectsWithinEachClass) {
  Rng rng(7);
  const ProbabilityGrid p = testing::RandomProbabilities(8, 8, 4, rng);
  const LabelGrid labels = PseudoLabels(p);
  const std::vector<double> e = EntropyMap(p);
  for (SelectionStrategy strategy : {SelectionStrategy::kClasswiseEntropy,
                                     SelectionStrategy::kClasswiseConfidence}) {
    const auto s = SelectReliable(p, labels, e, 0.5, strategy);
    int total = 0;
    for (int c = 0; c < 4; ++c) {
      int members = 0, chosen = 0;
      for (int j = 0; j < 64; ++j) {
        if (labels.at(j) != c) continue;
        ++members;
        chosen += s.mask[j] ? 1 : 0;
      }
      EXPECT_EQ(chosen, ReliableCount(members, 0.5)) << "class " << c;
      total += chosen;
    }
    EXPECT_EQ(s.selected, total);
  }
}

TEST(LabelTargetImageTest, BundlesEverything) {
  Rng rng(8);
  const ProbabilityGrid p = testing::RandomProbabilities(4, 4, 5, rng, 5.0);
  PgpcConfig config;
  config.kappa = 0.6;
  const PseudoLabelResult r = LabelTargetImage(p, config);
  EXPECT_EQ(r.labels, PseudoLabels(p));
  EXPECT_EQ(r.quality, QualityWeight(p, 0.6));
  EXPECT_EQ(r.entropy, EntropyMap(p));
  EXPECT_EQ(std::count(r.reliable_mask.begin(), r.reliable_mask.end(), true),
            8);
}

}  // namespace
}  // namespace pgpc
