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

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "pgpc/status.h"
#include "pgpc/trainer.h"

namespace pgpc {
namespace {

namespace fs = std::filesystem;

std::string FormatDouble(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string FormatFixed(double value, int digits) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
  return buffer;
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowIoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) ThrowIoError("failed writing '" + path + "'");
}

// Saves the cell config so any report row can be replayed from its hash.
void WriteCellConfig(const std::string& out_dir, const ExperimentConfig& config) {
  ExperimentConfig cell = config;
  cell.pgpc.rng_seed = 0;
  WriteText(OutputPath(out_dir, "configs/" + HashHex(CellHash(cell)) + ".cfg"),
            cell.ToText());
}

std::string PadRight(const std::string& s, size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string PadLeft(const std::string& s, size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::vector<double> Successful(const std::vector<CellResult>& cells) {
  std::vector<double> values;
  for (const CellResult& c : cells) {
    if (c.ok && c.miou) values.push_back(*c.miou);
  }
  return values;
}

}  // namespace

std::string MetricsCsvHeader() {
  return "iteration,l_s,l_t,l_c,total,anchors_used,negatives_used,"
         "skipped_classes";
}

std::string MetricsCsvRow(const LossReport& r) {
  return std::to_string(r.iteration) + "," + FormatDouble(r.l_s) + "," +
         FormatDouble(r.l_t) + "," + FormatDouble(r.l_c) + "," +
         FormatDouble(r.total) + "," + std::to_string(r.anchors_used) + "," +
         std::to_string(r.negatives_used) + "," +
         std::to_string(r.skipped_classes);
}

nlohmann::json SummaryJson(const ExperimentConfig& config, uint64_t seed,
                           int64_t iteration, const IouResult& result) {
  nlohmann::json j;
  j["seed"] = seed;
  j["iteration"] = iteration;
  j["miou"] = result.miou;
  nlohmann::json per_class = nlohmann::json::array();
  for (const auto& iou : result.per_class_iou) {
    per_class.push_back(iou ? nlohmann::json(*iou) : nlohmann::json(nullptr));
  }
  j["per_class_iou"] = per_class;
  nlohmann::json echo = nlohmann::json::object();
  for (const std::string& key : ExperimentConfig::Keys()) {
    echo[key] = config.Get(key);
  }
  j["config"] = echo;
  j["config_hash"] = HashHex(CellHash(config));
  return j;
}

std::string OutputPath(const std::string& dir, const std::string& name) {
  const fs::path relative(name);
  if (relative.is_absolute() || relative.empty()) {
    ThrowInvalidArgument("output name must be a relative path: " + name);
  }
  for (const auto& part : relative) {
    if (part == "..") ThrowInvalidArgument("output name escapes: " + name);
  }
  const fs::path full = fs::path(dir) / relative;
  std::error_code ec;
  fs::create_directories(full.parent_path(), ec);
  if (ec) {
    ThrowIoError("cannot create directory '" + full.parent_path().string() +
                 "': " + ec.message());
  }
  return full.string();
}

uint64_t CellHash(const ExperimentConfig& config) {
  ExperimentConfig cell = config;
  cell.pgpc.rng_seed = 0;
  return cell.Hash();
}

std::string HashHex(uint64_t hash) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016" PRIx64, hash);
  return buffer;
}

CellResult RunCell(const ExperimentConfig& config, uint64_t seed) {
  CellResult cell;
  cell.seed = seed;
  cell.config_hash = CellHash(config);
  try {
    const FitResult fit = Fit(config, seed);
    if (!std::isfinite(fit.evaluation.miou)) {
      cell.error = "non-finite mIoU";
      return cell;
    }
    cell.miou = fit.evaluation.miou;
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.error = e.what();
    spdlog::error("run {} seed {} failed: {}", HashHex(cell.config_hash), seed,
                  e.what());
  }
  return cell;
}

std::pair<double, double> MeanAndSd(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / values.size();
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (values.size() - 1))};
}

bool AblationReport::ok() const {
  for (const AblationRow& row : rows) {
    if (row.failed) return false;
  }
  return true;
}

std::vector<AblationRow> AblationRows(const ExperimentConfig& base) {
  std::vector<AblationRow> rows;
  AblationRow baseline;
  baseline.name = "baseline";
  baseline.config = base;
  baseline.config.pgpc.lambda_c = 0.0;
  rows.push_back(baseline);
  for (const char* positive : {"sp", "tp"}) {
    for (const char* negatives : {"sn", "tn", "sn+tn"}) {
      AblationRow row;
      row.config = base;
      ApplyVariant(std::string(positive) + "+" + negatives, &row.config.pgpc);
      if (!(row.config.pgpc.lambda_c > 0.0)) {
        ThrowConfigError("ablation rows need lambda_c > 0");
      }
      row.name = VariantName(row.config.pgpc);
      rows.push_back(row);
    }
  }
  return rows;
}

AblationReport RunAblation(const ExperimentConfig& base,
                           std::span<const uint64_t> seeds,
                           const std::string& out_dir) {
  if (seeds.empty()) ThrowConfigError("seed list is empty");
  AblationReport report;
  report.rows = AblationRows(base);
  for (AblationRow& row : report.rows) row.config.Validate();

  for (AblationRow& row : report.rows) {
    WriteCellConfig(out_dir, row.config);
    for (uint64_t seed : seeds) {
      spdlog::info("ablation {} seed {}", row.name, seed);
      row.cells.push_back(RunCell(row.config, seed));
      if (!row.cells.back().ok) row.failed = true;
    }
    const std::vector<double> values = Successful(row.cells);
    std::tie(row.mean, row.sd) = MeanAndSd(values);
  }
  const double baseline_mean = report.rows.front().mean;
  for (AblationRow& row : report.rows) row.delta = row.mean - baseline_mean;
  report.rows.front().delta = 0.0;

  std::string runs = "variant,config_hash,seed,status,miou\n";
  for (const AblationRow& row : report.rows) {
    for (const CellResult& c : row.cells) {
      runs += row.name + "," + HashHex(c.config_hash) + "," +
              std::to_string(c.seed) + "," + (c.ok ? "ok" : "failed") + "," +
              (c.miou ? FormatDouble(*c.miou) : std::string("nan")) + "\n";
    }
  }
  WriteText(OutputPath(out_dir, "ablation_runs.csv"), runs);

  std::string summary =
      "variant,config_hash,seeds,failed,mean_miou,sd_miou,delta_miou\n";
  for (const AblationRow& row : report.rows) {
    int failed = 0;
    for (const CellResult& c : row.cells) failed += c.ok ? 0 : 1;
    summary += row.name + "," + HashHex(CellHash(row.config)) + "," +
               std::to_string(row.cells.size()) + "," +
               std::to_string(failed) + "," + FormatDouble(row.mean) + "," +
               FormatDouble(row.sd) + "," + FormatDouble(row.delta) + "\n";
  }
  WriteText(OutputPath(out_dir, "ablation_summary.csv"), summary);

  std::ostringstream table;
  table << PadRight("variant", 12) << PadLeft("mIoU", 10) << PadLeft("sd", 9)
        << PadLeft("dmIoU", 10) << "\n";
  for (const AblationRow& row : report.rows) {
    table << PadRight(row.name, 12);
    if (row.failed) {
      table << PadLeft("FAILED", 10) << PadLeft("-", 9) << PadLeft("-", 10);
    } else {
      table << PadLeft(FormatFixed(100.0 * row.mean, 2), 10)
            << PadLeft(FormatFixed(100.0 * row.sd, 2), 9)
            << PadLeft((row.delta >= 0 ? "+" : "") +
                           FormatFixed(100.0 * row.delta, 2),
                       10);
    }
    table << "\n";
  }
  WriteText(OutputPath(out_dir, "ablation.txt"), table.str());
  return report;
}

std::vector<std::string> SweepParameters() {
  return {"lambda_c", "lambda_t",  "eta",
          "rank_r",   "anchors",   "negatives",
          "selection_strategy"};
}

std::string SweepKey(const std::string& parameter) {
  if (parameter == "anchors") return "anchors_per_class";
  if (parameter == "negatives") return "negatives_per_anchor";
  if (parameter == "selection_strategy") return "selection";
  for (const std::string& p : SweepParameters()) {
    if (p == parameter) return p;
  }
  ThrowConfigError("unknown sweep parameter '" + parameter + "'");
}

bool SweepReport::ok() const {
  for (const SweepRow& row : rows) {
    if (!row.cell.ok) return false;
  }
  return true;
}

SweepReport RunSweep(const ExperimentConfig& base, const std::string& parameter,
                     std::span<const std::string> values,
                     std::span<const uint64_t> seeds,
                     const std::string& out_dir) {
  if (seeds.empty()) ThrowConfigError("seed list is empty");
  if (values.empty()) ThrowConfigError("sweep value list is empty");
  const std::string key = SweepKey(parameter);
  std::vector<ExperimentConfig> configs;
  for (const std::string& value : values) {
    ExperimentConfig config = base;
    config.Set(key, value);
    config.Validate();
    configs.push_back(config);
  }

  SweepReport report;
  report.parameter = parameter;
  for (size_t v = 0; v < values.size(); ++v) {
    WriteCellConfig(out_dir, configs[v]);
    for (uint64_t seed : seeds) {
      spdlog::info("sweep {}={} seed {}", parameter, values[v], seed);
      report.rows.push_back({values[v], RunCell(configs[v], seed)});
    }
  }

  std::string csv = "parameter,value,seed,config_hash,status,miou\n";
  for (const SweepRow& row : report.rows) {
    csv += parameter + "," + row.value + "," + std::to_string(row.cell.seed) +
           "," + HashHex(row.cell.config_hash) + "," +
           (row.cell.ok ? "ok" : "failed") + "," +
           (row.cell.miou ? FormatDouble(*row.cell.miou) : std::string("nan")) +
           "\n";
  }
  WriteText(OutputPath(out_dir, "sweep_" + parameter + ".csv"), csv);
  return report;
}

}  // namespace pgpc
