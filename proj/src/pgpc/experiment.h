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

#ifndef PGPC_EXPERIMENT_H_
#define PGPC_EXPERIMENT_H_

// Report writers and the multi-run harnesses behind the `train`, `ablate`
// and `sweep` commands. Every file goes below the caller's output directory.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "pgpc/config.h"
#include "pgpc/losses.h"
#include "pgpc/metrics.h"

namespace pgpc {

// iteration,l_s,l_t,l_c,total,anchors_used,negatives_used,skipped_classes
std::string MetricsCsvHeader();
// Doubles are printed with 17 significant digits.
std::string MetricsCsvRow(const LossReport& report);

nlohmann::json SummaryJson(const ExperimentConfig& config, uint64_t seed,
                           int64_t iteration, const IouResult& result);

// Creates `dir` (and parents) and returns `dir / name`. `name` must be a
// plain relative path without "..".
std::string OutputPath(const std::string& dir, const std::string& name);

// Hash identifying a report cell: the config with rng_seed cleared.
uint64_t CellHash(const ExperimentConfig& config);
std::string HashHex(uint64_t hash);

struct CellResult {
  uint64_t seed = 0;
  uint64_t config_hash = 0;
  bool ok = false;
  std::string error;
  std::optional<double> miou;
};

// Trains and evaluates one (config, seed) cell. Never throws for run
// failures; they are reported through `ok` and `error`.
CellResult RunCell(const ExperimentConfig& config, uint64_t seed);

struct AblationRow {
  std::string name;
  ExperimentConfig config;
  std::vector<CellResult> cells;
  bool failed = false;
  double mean = 0.0;
  double sd = 0.0;
  double delta = 0.0;  // mean minus the baseline mean
};

struct AblationReport {
  std::vector<AblationRow> rows;
  bool ok() const;
};

// Baseline (lambda_c = 0) followed by the six SP/TP x {SN, TN, SN+TN} rows.
std::vector<AblationRow> AblationRows(const ExperimentConfig& base);

// Runs every row over every seed and writes ablation_runs.csv (long
// format), ablation_summary.csv and ablation.txt into `out_dir`.
AblationReport RunAblation(const ExperimentConfig& base,
                           std::span<const uint64_t> seeds,
                           const std::string& out_dir);

// Sweepable parameters: lambda_c, lambda_t, eta, rank_r, anchors, negatives,
// selection_strategy.
std::vector<std::string> SweepParameters();
// Config key a sweep parameter maps to. Throws Error(kConfig) if unknown.
std::string SweepKey(const std::string& parameter);

struct SweepRow {
  std::string value;
  CellResult cell;
};

struct SweepReport {
  std::string parameter;
  std::vector<SweepRow> rows;
  bool ok() const;
};

// One run per (value, seed), value-major. Writes sweep_<parameter>.csv into
// `out_dir`. Invalid values throw Error(kConfig) before anything runs.
SweepReport RunSweep(const ExperimentConfig& base, const std::string& parameter,
                     std::span<const std::string> values,
                     std::span<const uint64_t> seeds,
                     const std::string& out_dir);

// Mean and sample standard deviation (0 for fewer than two values).
std::pair<double, double> MeanAndSd(std::span<const double> values);

}  // namespace pgpc

#endif  // PGPC_EXPERIMENT_H_
