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

#include "pgpc/config.h"

#include <fstream>

#include "gtest/gtest.h"
#include "pgpc/status.h"
#include "test_util.h"

namespace pgpc {
namespace {

TEST(PgpcConfigTest, Defaults) {
  const PgpcConfig c;
  EXPECT_EQ(c.tau, 0.5);
  EXPECT_EQ(c.lambda_t, 1.0);
  EXPECT_EQ(c.lambda_c, 0.1);
  EXPECT_EQ(c.eta, 0.5);
  EXPECT_EQ(c.rank_r, 4);
  EXPECT_EQ(c.kappa, 0.968);
  EXPECT_EQ(c.alpha, 0.999);
  EXPECT_EQ(c.anchors_per_class, 256);
  EXPECT_EQ(c.negatives_per_anchor, 512);
  EXPECT_EQ(c.total_iters, 600);
  EXPECT_EQ(c.EffectiveWarmup(), 200);
  EXPECT_EQ(c.bank_capacity, 1024);
  EXPECT_EQ(c.positive, PositiveSource::kSource);
  EXPECT_TRUE(c.use_source_negatives);
  EXPECT_TRUE(c.use_target_negatives);
  EXPECT_NO_THROW(c.Validate(5));
}

TEST(PgpcConfigTest, ValidationFailures) {
  auto fails = [](auto mutate) {
    PgpcConfig c;
    mutate(c);
    try {
      c.Validate(5);
    } catch (const Error& e) {
      return e.code() == ErrorCode::kConfig;
    }
    return false;
  };
  EXPECT_TRUE(fails([](PgpcConfig& c) { c.tau = 0; }));
  EXPECT_TRUE(fails([](PgpcConfig& c) { c.eta = 0; }));
  EXPECT_TRUE(fails([](PgpcConfig& c) { c.eta = 1.01; }));
  EXPECT_TRUE(fails([](PgpcConfig& c) { c.rank_r = 0; }));
  EXPECT_TRUE(fails([](PgpcConfig& c) { c.rank_r = 5; }));
  EXPECT_TRUE(fails([](PgpcConfig& c) { c.kappa = 1.0; }));
  EXPECT_TRUE(fails([](PgpcConfig& c) { c.alpha = 1.0; }));
  EXPECT_TRUE(fails([](PgpcConfig& c) { c.lambda_c = -0.1; }));
  EXPECT_TRUE(fails([](PgpcConfig& c) { c.warmup_iters = 601; }));
  EXPECT_TRUE(fails([](PgpcConfig& c) {
    c.use_source_negatives = false;
    c.use_target_negatives = false;
  }));
  // Without the contrast term the negative flags do not matter.
  EXPECT_FALSE(fails([](PgpcConfig& c) {
    c.lambda_c = 0;
    c.use_source_negatives = false;
    c.use_target_negatives = false;
  }));
}

TEST(ExperimentConfigTest, TextRoundTripAndHash) {
  ExperimentConfig c;
  c.Set("tau", "0.25");
  c.Set("variant", "tp+tn");
  c.Set("warmup_iters", "17");
  c.Set("task.rotation_deg", "12.5");
  c.Set("selection", "classwise-confidence");
  c.Set("lambda_c", "0.1");
  const ExperimentConfig back = ExperimentConfig::FromText(c.ToText());
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.Hash(), c.Hash());
  EXPECT_EQ(back.pgpc.positive, PositiveSource::kTarget);
  EXPECT_FALSE(back.pgpc.use_source_negatives);
  EXPECT_EQ(back.pgpc.selection, SelectionStrategy::kClasswiseConfidence);

  ExperimentConfig other = c;
  other.Set("eta", "0.4");
  EXPECT_NE(other.Hash(), c.Hash());
}

TEST(ExperimentConfigTest, DoublesRoundTripExactly) {
  ExperimentConfig c;
  c.pgpc.tau = 0.1 + 0.2;
  c.task.spread = 1.0 / 3.0;
  const ExperimentConfig back = ExperimentConfig::FromText(c.ToText());
  EXPECT_EQ(back.pgpc.tau, c.pgpc.tau);
  EXPECT_EQ(back.task.spread, c.task.spread);
}

TEST(ExperimentConfigTest, KeysAreSortedAndGettable) {
  const auto keys = ExperimentConfig::Keys();
  ASSERT_FALSE(keys.empty());
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  const ExperimentConfig c;
  for (const auto& key : keys) EXPECT_NO_THROW(c.Get(key)) << key;
  EXPECT_EQ(c.Get("warmup_iters"), "auto");
}

TEST(ExperimentConfigTest, BadInputIsAConfigError) {
  ExperimentConfig c;
  EXPECT_THROW(c.Set("no_such_key", "1"), Error);
  EXPECT_THROW(c.Set("tau", "fast"), Error);
  EXPECT_THROW(c.Set("rank_r", "2.5"), Error);
  EXPECT_THROW(c.Set("ema_ramp", "maybe"), Error);
  EXPECT_THROW(c.Set("selection", "local"), Error);
  EXPECT_THROW(ExperimentConfig::FromText("tau 0.5\n"), Error);
  EXPECT_THROW(ExperimentConfig::FromFile("/nonexistent/pgpc.cfg"), Error);
}

TEST(ParseKeyValueTextTest, Grammar) {
  const auto pairs = ParseKeyValueText(
      "# comment line\n"
      "\n"
      "  tau = 0.5   # trailing\n"
      "eta=0.6\n"
      "eta = 0.4\n");
  ASSERT_EQ(pairs.size(), 3u);
  EXPECT_EQ(pairs[0], (std::pair<std::string, std::string>{"tau", "0.5"}));
  EXPECT_EQ(pairs[1].second, "0.6");
  EXPECT_EQ(ExperimentConfig::FromText("eta=0.6\neta = 0.4\n").pgpc.eta, 0.4);
}

TEST(ExperimentConfigTest, FromFile) {
  testing::TempDir dir("config");
  {
    std::ofstream out(dir.File("run.cfg"));
    out << "lambda_c = 0.2\nmodel.hidden = 12\n";
  }
  const ExperimentConfig c = ExperimentConfig::FromFile(dir.File("run.cfg"));
  EXPECT_EQ(c.pgpc.lambda_c, 0.2);
  EXPECT_EQ(c.model.hidden, 12);
}

TEST(VariantTest, ParseAndName) {
  PgpcConfig c;
  ApplyVariant("SP+SN+TN", &c);
  EXPECT_EQ(VariantName(c), "sp+sn+tn");
  ApplyVariant("tpxsn", &c);
  EXPECT_EQ(c.positive, PositiveSource::kTarget);
  EXPECT_TRUE(c.use_source_negatives);
  EXPECT_FALSE(c.use_target_negatives);
  ApplyVariant("sp,tn", &c);
  EXPECT_EQ(VariantName(c), "sp+tn");
  EXPECT_THROW(ApplyVariant("sp+tp+sn", &c), Error);
  EXPECT_THROW(ApplyVariant("sn+tn", &c), Error);
  EXPECT_THROW(ApplyVariant("sp+qq", &c), Error);
}

TEST(SelectionStrategyTest, NamesRoundTrip) {
  for (SelectionStrategy s :
       {SelectionStrategy::kGlobalEntropy, SelectionStrategy::kGlobalConfidence,
        SelectionStrategy::kClasswiseEntropy,
        SelectionStrategy::kClasswiseConfidence}) {
    EXPECT_EQ(ParseSelectionStrategy(ToString(s)), s);
  }
}

}  // namespace
}  // namespace pgpc
