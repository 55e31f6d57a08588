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

#include "pgpc/experiment.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtest/gtest.h"
#include "pgpc/status.h"
#include "test_util.h"

namespace pgpc {
namespace {

std::vector<std::string> ReadLines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream s(line);
  for (std::string field; std::getline(s, field, ',');) out.push_back(field);
  return out;
}

TEST(MetricsCsvTest, HeaderAndRow) {
  EXPECT_EQ(MetricsCsvHeader(),
            "iteration,l_s,l_t,l_c,total,anchors_used,negatives_used,"
            "skipped_classes");
  LossReport r;
  r.iteration = 3;
  r.l_s = 0.1;
  r.total = 0.1;
  r.anchors_used = 2;
  EXPECT_EQ(MetricsCsvRow(r), "3,0.10000000000000001,0,0,0.10000000000000001,2,0,0");
}

TEST(SummaryJsonTest, Fields) {
  IouResult iou;
  iou.per_class_iou = {0.5, std::nullopt};
  iou.miou = 0.5;
  const nlohmann::json j = SummaryJson(ExperimentConfig(), 4, 600, iou);
  EXPECT_EQ(j["seed"], 4);
  EXPECT_EQ(j["iteration"], 600);
  EXPECT_EQ(j["miou"], 0.5);
  EXPECT_TRUE(j["per_class_iou"][1].is_null());
  EXPECT_EQ(j["config"]["tau"], "0.5");
  EXPECT_EQ(j["config_hash"], HashHex(CellHash(ExperimentConfig())));
}

TEST(OutputPathTest, StaysBelowTheDirectory) {
  testing::TempDir dir("out");
  const std::string nested = OutputPath(dir.File("a"), "b/c.csv");
  EXPECT_EQ(nested, dir.File("a/b/c.csv"));
  EXPECT_TRUE(std::filesystem::is_directory(dir.File("a/b")));
  EXPECT_THROW(OutputPath(dir.File("a"), "../escape.csv"), Error);
  EXPECT_THROW(OutputPath(dir.File("a"), "b/../../escape.csv"), Error);
  EXPECT_THROW(OutputPath(dir.File("a"), "/etc/passwd"), Error);
  EXPECT_THROW(OutputPath(dir.File("a"), ""), Error);
}

TEST(CellHashTest, IgnoresTheSeed) {
  ExperimentConfig a;
  ExperimentConfig b = a;
  b.pgpc.rng_seed = 99;
  EXPECT_EQ(CellHash(a), CellHash(b));
  b.pgpc.eta = 0.6;
  EXPECT_NE(CellHash(a), CellHash(b));
  EXPECT_EQ(HashHex(0xabc), "0000000000000abc");
}

TEST(MeanAndSdTest, Values) {
  const std::vector<double> v = {1, 2, 3, 4};
  const auto [mean, sd] = MeanAndSd(v);
  EXPECT_DOUBLE_EQ(mean, 2.5);
  EXPECT_DOUBLE_EQ(sd, std::sqrt(5.0 / 3.0));
  EXPECT_EQ(MeanAndSd(std::vector<double>{7}).second, 0.0);
}

TEST(RunCellTest, FailuresAreReportedNotThrown) {
  ExperimentConfig bad = testing::SmallConfig();
  bad.pgpc.tau = 0;
  const CellResult r = RunCell(bad, 1);
  EXPECT_FALSE(r.ok);
  EXPECT_FALSE(r.error.empty());
  EXPECT_FALSE(r.miou.has_value());
}

TEST(AblationTest, SmokeReportHasSevenFiniteRows) {
  ExperimentConfig config = testing::SmallConfig();
  config.pgpc.total_iters = 200;
  config.pgpc.warmup_iters.reset();
  testing::TempDir dir("ablation");
  const std::vector<uint64_t> seeds = {1};
  const AblationReport report = RunAblation(config, seeds, dir.File("out"));
  ASSERT_TRUE(report.ok());
  ASSERT_EQ(report.rows.size(), 7u);
  EXPECT_EQ(report.rows[0].name, "baseline");
  EXPECT_EQ(report.rows[0].config.pgpc.lambda_c, 0.0);
  EXPECT_EQ(report.rows[0].delta, 0.0);
  EXPECT_EQ(report.rows.back().name, "tp+sn+tn");
  for (const AblationRow& row : report.rows) {
    EXPECT_TRUE(std::isfinite(row.mean)) << row.name;
    EXPECT_NEAR(row.delta, row.mean - report.rows[0].mean, 1e-15);
  }

  const auto summary = ReadLines(dir.File("out/ablation_summary.csv"));
  EXPECT_EQ(summary.size(), 8u);
  EXPECT_EQ(SplitCsv(summary[1])[0], "baseline");
  EXPECT_EQ(SplitCsv(summary[1])[6], "0");
  EXPECT_EQ(ReadLines(dir.File("out/ablation_runs.csv")).size(), 8u);
  EXPECT_EQ(ReadLines(dir.File("out/ablation.txt")).size(), 8u);
}

TEST(AblationTest, CellsReproduceFromHashAndSeed) {
  ExperimentConfig config = testing::SmallConfig();
  testing::TempDir dir("repro");
  const std::vector<uint64_t> seeds = {2, 3};
  const AblationReport report = RunAblation(config, seeds, dir.File("out"));
  const auto runs = ReadLines(dir.File("out/ablation_runs.csv"));
  ASSERT_EQ(runs.size(), 15u);
  for (size_t i = 1; i < runs.size(); i += 5) {
    const auto fields = SplitCsv(runs[i]);
    const ExperimentConfig recorded = ExperimentConfig::FromFile(
        dir.File("out/configs/" + fields[1] + ".cfg"));
    EXPECT_EQ(HashHex(CellHash(recorded)), fields[1]);
    const CellResult again = RunCell(recorded, std::stoull(fields[2]));
    ASSERT_TRUE(again.miou.has_value());
    std::ostringstream formatted;
    formatted.precision(17);
    formatted << *again.miou;
    EXPECT_EQ(formatted.str(), fields[4]) << runs[i];
  }
}

TEST(SweepTest, CardinalityAndLayout) {
  ExperimentConfig config = testing::SmallConfig();
  testing::TempDir dir("sweep");
  const std::vector<uint64_t> seeds = {0, 1};
  const std::vector<std::string> values = {"0", "0.05", "0.1", "0.2"};
  const SweepReport report =
      RunSweep(config, "lambda_c", values, seeds, dir.File("out"));
  ASSERT_TRUE(report.ok());
  EXPECT_EQ(report.rows.size(), 8u);
  EXPECT_EQ(report.rows[0].value, "0");
  EXPECT_EQ(report.rows[1].value, "0");
  EXPECT_EQ(report.rows[2].value, "0.05");
  const auto lines = ReadLines(dir.File("out/sweep_lambda_c.csv"));
  ASSERT_EQ(lines.size(), 9u);
  EXPECT_EQ(lines[0], "parameter,value,seed,config_hash,status,miou");
}

TEST(SweepTest, EtaAndSelectionStrategies) {
  ExperimentConfig config = testing::SmallConfig();
  testing::TempDir dir("sweep2");
  const std::vector<uint64_t> seeds = {0};
  const std::vector<std::string> etas = {"0.4", "0.5", "0.6"};
  const SweepReport eta = RunSweep(config, "eta", etas, seeds, dir.File("o"));
  ASSERT_EQ(eta.rows.size(), 3u);
  for (const SweepRow& row : eta.rows) EXPECT_TRUE(std::isfinite(*row.cell.miou));

  const std::vector<std::string> strategies = {
      "global-entropy", "global-confidence", "classwise-entropy",
      "classwise-confidence"};
  const SweepReport sel = RunSweep(config, "selection_strategy", strategies,
                                   seeds, dir.File("o"));
  ASSERT_EQ(sel.rows.size(), 4u);
  EXPECT_TRUE(sel.ok());
  EXPECT_EQ(ReadLines(dir.File("o/sweep_selection_strategy.csv")).size(), 5u);
}

TEST(SweepTest, ValidatesBeforeRunning) {
  testing::TempDir dir("sweep3");
  const std::vector<uint64_t> seeds = {0};
  const std::vector<std::string> bad = {"0.5", "1.5"};
  EXPECT_THROW(
      RunSweep(testing::SmallConfig(), "eta", bad, seeds, dir.File("o")),
      Error);
  EXPECT_FALSE(std::filesystem::exists(dir.File("o/sweep_eta.csv")));
  const std::vector<std::string> ok = {"0.5"};
  EXPECT_THROW(
      RunSweep(testing::SmallConfig(), "alpha", ok, seeds, dir.File("o")),
      Error);
  EXPECT_EQ(SweepKey("anchors"), "anchors_per_class");
  EXPECT_EQ(SweepKey("negatives"), "negatives_per_anchor");
}

}  // namespace
}  // namespace pgpc
