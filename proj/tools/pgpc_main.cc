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

// pgpc command-line runner for the synthetic adaptation task. Talks to the library only through the C interface.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pgpc/pgpc.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRun = 3;

struct Options {
  std::string config_path;
  std::vector<std::string> seeds;
  std::string out = "pgpc_out";
  std::string checkpoint;
  std::optional<int64_t> stop_after;
  // Flag name -> config key; filled values override the config file.
  std::map<std::string, std::string> overrides;
  std::string variant;
  std::string selection;
  // sweep
  std::string parameter;
  std::vector<std::string> values;
  // dump
  std::string split = "source";
};

class RunError {
 public:
  RunError(pgpc_status status, std::string message)
      : status(status), message(std::move(message)) {}
  pgpc_status status;
  std::string message;
};

void Check(pgpc_status status) {
  if (status != PGPC_OK) throw RunError(status, pgpc_last_error());
}

int ExitCodeFor(pgpc_status status) {
  return status == PGPC_ERR_CONFIG || status == PGPC_ERR_INVALID_ARGUMENT
             ? kExitConfig
             : kExitRun;
}

struct ConfigHandle {
  pgpc_config* ptr = nullptr;
  ConfigHandle() = default;
  ConfigHandle(const ConfigHandle&) = delete;
  ConfigHandle& operator=(const ConfigHandle&) = delete;
  ~ConfigHandle() { pgpc_config_destroy(ptr); }
};

struct TrainerHandle {
  pgpc_trainer* ptr = nullptr;
  TrainerHandle() = default;
  TrainerHandle(const TrainerHandle&) = delete;
  TrainerHandle& operator=(const TrainerHandle&) = delete;
  ~TrainerHandle() { pgpc_trainer_destroy(ptr); }
};

// Accepts "3", "0,1,2" (already split by CLI11) and ranges such as "0-9".
std::vector<uint64_t> ParseSeeds(const std::vector<std::string>& items) {
  std::vector<uint64_t> seeds;
  for (const std::string& item : items) {
    try {
      const size_t dash = item.find('-');
      size_t used = 0;
      if (dash == std::string::npos || dash == 0) {
        seeds.push_back(std::stoull(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
        continue;
      }
      const uint64_t lo = std::stoull(item.substr(0, dash), &used);
      if (used != dash) throw std::invalid_argument(item);
      const std::string rest = item.substr(dash + 1);
      const uint64_t hi = std::stoull(rest, &used);
      if (used != rest.size() || hi < lo) throw std::invalid_argument(item);
      for (uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    } catch (const std::exception&) {
      throw RunError(PGPC_ERR_CONFIG, "bad seed '" + item + "'");
    }
  }
  if (seeds.empty()) seeds.push_back(0);
  return seeds;
}

void BuildConfig(const Options& opt, ConfigHandle* config) {
  if (opt.config_path.empty()) {
    Check(pgpc_config_create(&config->ptr));
  } else {
    Check(pgpc_config_load(opt.config_path.c_str(), &config->ptr));
  }
  for (const auto& [key, value] : opt.overrides) {
    Check(pgpc_config_set(config->ptr, key.c_str(), value.c_str()));
  }
  if (!opt.variant.empty()) {
    Check(pgpc_config_set_variant(config->ptr, opt.variant.c_str()));
  }
  if (!opt.selection.empty()) {
    Check(pgpc_config_set(config->ptr, "selection", opt.selection.c_str()));
  }
  Check(pgpc_config_validate(config->ptr));
}

bool HasConfigFlags(const Options& opt) {
  return !opt.config_path.empty() || !opt.overrides.empty() ||
         !opt.variant.empty() || !opt.selection.empty();
}

std::string Join(const std::filesystem::path& dir, const std::string& name) {
  return (dir / name).string();
}

void MakeDir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw RunError(PGPC_ERR_IO, "cannot create " + dir.string());
}

void PrintEvaluation(const pgpc_trainer* trainer, const std::string& label) {
  double miou = 0.0;
  Check(pgpc_trainer_evaluate(trainer, &miou, nullptr, 0));
  int64_t iteration = 0;
  Check(pgpc_trainer_iteration(trainer, &iteration));
  std::printf("%s iteration %lld target mIoU %.4f\n", label.c_str(),
              static_cast<long long>(iteration), miou);
}

void TrainOne(const Options& opt, const pgpc_config* config, uint64_t seed,
              const std::filesystem::path& dir) {
  MakeDir(dir);
  TrainerHandle trainer;
  const std::string metrics = Join(dir, "metrics.csv");
  if (!opt.checkpoint.empty()) {
    Check(pgpc_trainer_load(opt.checkpoint.c_str(), &trainer.ptr));
  } else {
    Check(pgpc_trainer_create(config, seed, &trainer.ptr));
    std::error_code ec;
    std::filesystem::remove(metrics, ec);
  }
  int64_t until = 0;
  Check(pgpc_trainer_total_iters(trainer.ptr, &until));
  if (opt.stop_after) until = std::min(until, *opt.stop_after);
  Check(pgpc_trainer_run(trainer.ptr, until, metrics.c_str()));
  Check(pgpc_trainer_save(trainer.ptr, Join(dir, "checkpoint.pgck").c_str()));
  Check(pgpc_trainer_write_summary(trainer.ptr,
                                   Join(dir, "summary.json").c_str()));
  PrintEvaluation(trainer.ptr, opt.checkpoint.empty()
                                   ? "seed " + std::to_string(seed)
                                   : std::string("resumed"));
}

int RunTrain(const Options& opt) {
  ConfigHandle config;
  if (!opt.checkpoint.empty()) {
    if (HasConfigFlags(opt)) {
      throw RunError(PGPC_ERR_CONFIG,
                     "--checkpoint resumes a run; config flags are not "
                     "allowed with it");
    }
    TrainOne(opt, nullptr, 0, opt.out);
    return kExitOk;
  }
  BuildConfig(opt, &config);
  const std::vector<uint64_t> seeds = ParseSeeds(opt.seeds);
  for (uint64_t seed : seeds) {
    const std::filesystem::path dir =
        seeds.size() == 1 ? std::filesystem::path(opt.out)
                          : std::filesystem::path(opt.out) /
                                ("seed_" + std::to_string(seed));
    TrainOne(opt, config.ptr, seed, dir);
  }
  return kExitOk;
}

int RunAblate(const Options& opt) {
  ConfigHandle config;
  BuildConfig(opt, &config);
  const std::vector<uint64_t> seeds = ParseSeeds(opt.seeds);
  const pgpc_status status =
      pgpc_run_ablation(config.ptr, seeds.data(), seeds.size(), opt.out.c_str());
  if (status == PGPC_OK || status == PGPC_ERR_RUNTIME) {
    std::FILE* table =
        std::fopen(Join(opt.out, "ablation.txt").c_str(), "r");
    if (table) {
      char line[256];
      while (std::fgets(line, sizeof(line), table)) std::fputs(line, stdout);
      std::fclose(table);
    }
  }
  Check(status);
  return kExitOk;
}

int RunSweep(const Options& opt) {
  ConfigHandle config;
  BuildConfig(opt, &config);
  const std::vector<uint64_t> seeds = ParseSeeds(opt.seeds);
  std::vector<const char*> values;
  for (const std::string& v : opt.values) values.push_back(v.c_str());
  Check(pgpc_run_sweep(config.ptr, opt.parameter.c_str(), values.data(),
                       values.size(), seeds.data(), seeds.size(),
                       opt.out.c_str()));
  std::printf("wrote %s\n",
              Join(opt.out, "sweep_" + opt.parameter + ".csv").c_str());
  return kExitOk;
}

int RunEvaluate(const Options& opt) {
  if (opt.checkpoint.empty()) {
    throw RunError(PGPC_ERR_CONFIG, "evaluate needs --checkpoint");
  }
  TrainerHandle trainer;
  Check(pgpc_trainer_load(opt.checkpoint.c_str(), &trainer.ptr));
  MakeDir(opt.out);
  Check(pgpc_trainer_write_summary(trainer.ptr,
                                   Join(opt.out, "summary.json").c_str()));
  PrintEvaluation(trainer.ptr, "checkpoint");
  return kExitOk;
}

int RunDump(const Options& opt) {
  ConfigHandle config;
  BuildConfig(opt, &config);
  const std::vector<uint64_t> seeds = ParseSeeds(opt.seeds);
  MakeDir(opt.out);
  for (uint64_t seed : seeds) {
    const std::string name =
        opt.split + (seeds.size() == 1 ? "" : "_seed" + std::to_string(seed)) +
        ".pgrd";
    Check(pgpc_dump_dataset(config.ptr, seed, opt.split.c_str(),
                            Join(opt.out, name).c_str()));
    std::printf("wrote %s\n", Join(opt.out, name).c_str());
  }
  return kExitOk;
}

void AddOverride(CLI::App* app, Options* opt, const std::string& flag,
                 const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(
      "--" + flag,
      [opt, key](const std::string& value) { opt->overrides[key] = value; },
      help);
}

void AddConfigOptions(CLI::App* app, Options* opt) {
  app->add_option("--config", opt->config_path, "key = value config file");
  AddOverride(app, opt, "iters", "total_iters", "training iterations");
  AddOverride(app, opt, "eta", "eta", "reliable pixel fraction");
  AddOverride(app, opt, "kappa", "kappa", "quality confidence threshold");
  AddOverride(app, opt, "tau", "tau", "contrast temperature");
  AddOverride(app, opt, "lambda-c", "lambda_c", "contrast loss weight");
  AddOverride(app, opt, "lambda-t", "lambda_t", "target loss weight");
  AddOverride(app, opt, "rank-r", "rank_r", "target negative rank threshold");
  AddOverride(app, opt, "anchors-per-class", "anchors_per_class",
              "anchors per class");
  AddOverride(app, opt, "negatives-per-anchor", "negatives_per_anchor",
              "negatives per anchor");
  AddOverride(app, opt, "warmup", "warmup_iters",
              "contrast warmup iterations or 'auto'");
  app->add_option("--variant", opt->variant, "{sp,tp}x{sn,tn}, e.g. sp+sn+tn");
  app->add_option("--selection", opt->selection,
                  "global-entropy, global-confidence, classwise-entropy or "
                  "classwise-confidence");
}

void AddCommon(CLI::App* app, Options* opt) {
  app->add_option("--seed", opt->seeds, "seed list, e.g. 0,1,2 or 0-9")
      ->delimiter(',');
  app->add_option("--out", opt->out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-label guided pixel contrast on a synthetic shift task"};
  app.require_subcommand(1);
  Options opt;

  CLI::App* train = app.add_subcommand("train", "train one run per seed");
  AddCommon(train, &opt);
  AddConfigOptions(train, &opt);
  train->add_option("--checkpoint", opt.checkpoint, "resume from checkpoint");
  train->add_option("--stop-after", opt.stop_after,
                    "stop (and checkpoint) at this iteration");

  CLI::App* ablate = app.add_subcommand("ablate", "SP/TP x SN/TN ablation");
  AddCommon(ablate, &opt);
  AddConfigOptions(ablate, &opt);

  CLI::App* sweep = app.add_subcommand("sweep", "one-parameter sweep");
  AddCommon(sweep, &opt);
  AddConfigOptions(sweep, &opt);
  sweep->add_option("--param", opt.parameter,
                    "lambda_c, lambda_t, eta, rank_r, anchors, negatives or "
                    "selection_strategy")
      ->required();
  sweep->add_option("--values", opt.values, "comma separated values")
      ->delimiter(',')
      ->required();

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "held-out mIoU of a checkpoint");
  evaluate->add_option("--checkpoint", opt.checkpoint, "checkpoint file")
      ->required();
  evaluate->add_option("--out", opt.out, "output directory");

  CLI::App* dump = app.add_subcommand("dump", "write a dataset split");
  AddCommon(dump, &opt);
  AddConfigOptions(dump, &opt);
  dump->add_option("--split", opt.split, "source, target or test")
      ->check(CLI::IsMember({"source", "target", "test"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (train->parsed()) return RunTrain(opt);
    if (ablate->parsed()) return RunAblate(opt);
    if (sweep->parsed()) return RunSweep(opt);
    if (evaluate->parsed()) return RunEvaluate(opt);
    if (dump->parsed()) return RunDump(opt);
  } catch (const RunError& e) {
    std::fprintf(stderr, "pgpc: %s\n", e.message.c_str());
    return ExitCodeFor(e.status);
  }
  return kExitConfig;
}
