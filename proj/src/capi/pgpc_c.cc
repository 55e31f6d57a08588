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

#include "pgpc/pgpc.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "pgpc/config.h"
#include "pgpc/experiment.h"
#include "pgpc/status.h"
#include "pgpc/synth_data.h"
#include "pgpc/trainer.h"

struct pgpc_config {
  pgpc::ExperimentConfig value;
};

struct pgpc_trainer {
  std::unique_ptr<pgpc::Trainer> trainer;
};

namespace {

thread_local std::string last_error;

pgpc_status Fail(pgpc_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs `body`, mapping exceptions to status codes.
template <typename F>
pgpc_status Guard(F&& body) {
  try {
    return body();
  } catch (const pgpc::Error& e) {
    return Fail(static_cast<pgpc_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(PGPC_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return Fail(PGPC_ERR_RUNTIME, e.what());
  }
}

pgpc_status CopyOut(const std::string& text, char* buffer, size_t capacity,
                    size_t* needed) {
  if (needed) *needed = text.size();
  if (!buffer) {
    return capacity == 0 ? PGPC_OK
                         : Fail(PGPC_ERR_INVALID_ARGUMENT, "null buffer");
  }
  if (capacity < text.size() + 1) {
    return Fail(PGPC_ERR_INVALID_ARGUMENT, "buffer too small");
  }
  std::memcpy(buffer, text.c_str(), text.size() + 1);
  return PGPC_OK;
}

pgpc_loss_report ToC(const pgpc::LossReport& r) {
  return {r.iteration,       r.l_s,
          r.l_t,             r.l_c,
          r.total,           r.anchors_used,
          r.negatives_used,  r.skipped_classes};
}

#define PGPC_REQUIRE(cond, what) \
  if (!(cond)) return Fail(PGPC_ERR_INVALID_ARGUMENT, what)

}  // namespace

extern "C" {

const char* pgpc_last_error(void) { return last_error.c_str(); }

const char* pgpc_version(void) { return "0.1.0"; }

pgpc_status pgpc_config_create(pgpc_config** out) {
  PGPC_REQUIRE(out, "null output handle");
  return Guard([&] {
    *out = new pgpc_config{};
    return PGPC_OK;
  });
}

pgpc_status pgpc_config_load(const char* path, pgpc_config** out) {
  PGPC_REQUIRE(path && out, "null argument");
  return Guard([&] {
    auto config = std::make_unique<pgpc_config>();
    config->value = pgpc::ExperimentConfig::FromFile(path);
    *out = config.release();
    return PGPC_OK;
  });
}

pgpc_status pgpc_config_parse(const char* text, pgpc_config** out) {
  PGPC_REQUIRE(text && out, "null argument");
  return Guard([&] {
    auto config = std::make_unique<pgpc_config>();
    config->value = pgpc::ExperimentConfig::FromText(text);
    *out = config.release();
    return PGPC_OK;
  });
}

pgpc_status pgpc_config_clone(const pgpc_config* config, pgpc_config** out) {
  PGPC_REQUIRE(config && out, "null argument");
  return Guard([&] {
    *out = new pgpc_config{config->value};
    return PGPC_OK;
  });
}

void pgpc_config_destroy(pgpc_config* config) { delete config; }

pgpc_status pgpc_config_set(pgpc_config* config, const char* key,
                            const char* value) {
  PGPC_REQUIRE(config && key && value, "null argument");
  return Guard([&] {
    config->value.Set(key, value);
    return PGPC_OK;
  });
}

pgpc_status pgpc_config_set_variant(pgpc_config* config, const char* variant) {
  PGPC_REQUIRE(config && variant, "null argument");
  return Guard([&] {
    pgpc::ApplyVariant(variant, &config->value.pgpc);
    return PGPC_OK;
  });
}

pgpc_status pgpc_config_get(const pgpc_config* config, const char* key,
                            char* buffer, size_t capacity, size_t* needed) {
  PGPC_REQUIRE(config && key, "null argument");
  return Guard([&] {
    return CopyOut(config->value.Get(key), buffer, capacity, needed);
  });
}

pgpc_status pgpc_config_to_text(const pgpc_config* config, char* buffer,
                                size_t capacity, size_t* needed) {
  PGPC_REQUIRE(config, "null config");
  return Guard(
      [&] { return CopyOut(config->value.ToText(), buffer, capacity, needed); });
}

pgpc_status pgpc_config_validate(const pgpc_config* config) {
  PGPC_REQUIRE(config, "null config");
  return Guard([&] {
    config->value.Validate();
    return PGPC_OK;
  });
}

pgpc_status pgpc_config_hash(const pgpc_config* config, uint64_t* out) {
  PGPC_REQUIRE(config && out, "null argument");
  return Guard([&] {
    *out = pgpc::CellHash(config->value);
    return PGPC_OK;
  });
}

pgpc_status pgpc_trainer_create(const pgpc_config* config, uint64_t seed,
                                pgpc_trainer** out) {
  PGPC_REQUIRE(config && out, "null argument");
  return Guard([&] {
    auto handle = std::make_unique<pgpc_trainer>();
    handle->trainer = std::make_unique<pgpc::Trainer>(config->value, seed);
    *out = handle.release();
    return PGPC_OK;
  });
}

pgpc_status pgpc_trainer_load(const char* checkpoint_path, pgpc_trainer** out) {
  PGPC_REQUIRE(checkpoint_path && out, "null argument");
  return Guard([&] {
    auto handle = std::make_unique<pgpc_trainer>();
    handle->trainer = std::make_unique<pgpc::Trainer>(
        pgpc::Trainer::LoadCheckpoint(checkpoint_path));
    *out = handle.release();
    return PGPC_OK;
  });
}

void pgpc_trainer_destroy(pgpc_trainer* trainer) { delete trainer; }

pgpc_status pgpc_trainer_step(pgpc_trainer* trainer, pgpc_loss_report* report) {
  PGPC_REQUIRE(trainer, "null trainer");
  return Guard([&] {
    const pgpc::LossReport r = trainer->trainer->Step();
    if (report) *report = ToC(r);
    return PGPC_OK;
  });
}

pgpc_status pgpc_trainer_run(pgpc_trainer* trainer, int64_t until,
                             const char* metrics_csv) {
  PGPC_REQUIRE(trainer, "null trainer");
  return Guard([&] {
    std::ofstream csv;
    if (metrics_csv) {
      std::error_code ec;
      const bool fresh = !std::filesystem::exists(metrics_csv, ec) ||
                         std::filesystem::file_size(metrics_csv, ec) == 0;
      csv.open(metrics_csv, std::ios::binary | std::ios::app);
      if (!csv) pgpc::ThrowIoError(std::string("cannot open ") + metrics_csv);
      if (fresh) csv << pgpc::MetricsCsvHeader() << "\n";
    }
    trainer->trainer->RunUntil(until, [&](const pgpc::LossReport& r) {
      if (csv.is_open()) csv << pgpc::MetricsCsvRow(r) << "\n";
    });
    if (csv.is_open()) {
      csv.flush();
      if (!csv) pgpc::ThrowIoError(std::string("failed writing ") + metrics_csv);
    }
    return PGPC_OK;
  });
}

pgpc_status pgpc_trainer_iteration(const pgpc_trainer* trainer, int64_t* out) {
  PGPC_REQUIRE(trainer && out, "null argument");
  *out = trainer->trainer->iteration();
  return PGPC_OK;
}

pgpc_status pgpc_trainer_total_iters(const pgpc_trainer* trainer,
                                     int64_t* out) {
  PGPC_REQUIRE(trainer && out, "null argument");
  *out = trainer->trainer->state().config.pgpc.total_iters;
  return PGPC_OK;
}

pgpc_status pgpc_trainer_save(const pgpc_trainer* trainer,
                              const char* checkpoint_path) {
  PGPC_REQUIRE(trainer && checkpoint_path, "null argument");
  return Guard([&] {
    trainer->trainer->SaveCheckpoint(checkpoint_path);
    return PGPC_OK;
  });
}

pgpc_status pgpc_trainer_evaluate(const pgpc_trainer* trainer, double* miou,
                                  double* per_class, size_t capacity) {
  PGPC_REQUIRE(trainer, "null trainer");
  PGPC_REQUIRE(per_class || capacity == 0, "null per-class buffer");
  return Guard([&] {
    const pgpc::IouResult result = trainer->trainer->Evaluate();
    if (miou) *miou = result.miou;
    for (size_t c = 0; c < capacity; ++c) {
      per_class[c] = c < result.per_class_iou.size() && result.per_class_iou[c]
                         ? *result.per_class_iou[c]
                         : std::numeric_limits<double>::quiet_NaN();
    }
    return PGPC_OK;
  });
}

pgpc_status pgpc_trainer_write_summary(const pgpc_trainer* trainer,
                                       const char* path) {
  PGPC_REQUIRE(trainer && path, "null argument");
  return Guard([&] {
    const pgpc::Trainer& t = *trainer->trainer;
    const nlohmann::json summary = pgpc::SummaryJson(
        t.state().config, t.state().seed, t.iteration(), t.Evaluate());
    std::ofstream out(path, std::ios::binary);
    if (!out) pgpc::ThrowIoError(std::string("cannot open ") + path);
    out << summary.dump(2) << "\n";
    if (!out) pgpc::ThrowIoError(std::string("failed writing ") + path);
    return PGPC_OK;
  });
}

pgpc_status pgpc_trainer_label_violations(const pgpc_trainer* trainer,
                                          int64_t* out) {
  PGPC_REQUIRE(trainer && out, "null argument");
  const pgpc::SplitData& data = trainer->trainer->data();
  int64_t total = 0;
  for (const auto& split : {data.source, data.target, data.test}) {
    if (split) total += split->audit().violations.load();
  }
  *out = total;
  return PGPC_OK;
}

pgpc_status pgpc_run_ablation(const pgpc_config* config, const uint64_t* seeds,
                              size_t num_seeds, const char* out_dir) {
  PGPC_REQUIRE(config && out_dir, "null argument");
  PGPC_REQUIRE(seeds || num_seeds == 0, "null seed list");
  return Guard([&] {
    const pgpc::AblationReport report = pgpc::RunAblation(
        config->value, {seeds, num_seeds}, out_dir);
    if (!report.ok()) return Fail(PGPC_ERR_RUNTIME, "some ablation runs failed");
    return PGPC_OK;
  });
}

pgpc_status pgpc_run_sweep(const pgpc_config* config, const char* parameter,
                           const char* const* values, size_t num_values,
                           const uint64_t* seeds, size_t num_seeds,
                           const char* out_dir) {
  PGPC_REQUIRE(config && parameter && out_dir, "null argument");
  PGPC_REQUIRE(values || num_values == 0, "null value list");
  PGPC_REQUIRE(seeds || num_seeds == 0, "null seed list");
  return Guard([&] {
    std::vector<std::string> list;
    for (size_t i = 0; i < num_values; ++i) {
      PGPC_REQUIRE(values[i], "null sweep value");
      list.emplace_back(values[i]);
    }
    const pgpc::SweepReport report = pgpc::RunSweep(
        config->value, parameter, list, {seeds, num_seeds}, out_dir);
    if (!report.ok()) return Fail(PGPC_ERR_RUNTIME, "some sweep runs failed");
    return PGPC_OK;
  });
}

pgpc_status pgpc_dump_dataset(const pgpc_config* config, uint64_t seed,
                              const char* split, const char* path) {
  PGPC_REQUIRE(config && split && path, "null argument");
  return Guard([&] {
    config->value.Validate();
    const pgpc::SplitData data = pgpc::MakeSplits(config->value, seed);
    const std::string name = split;
    std::shared_ptr<const pgpc::Dataset> dataset;
    if (name == "source") {
      dataset = data.source;
    } else if (name == "target") {
      dataset = data.target;
    } else if (name == "test") {
      dataset = data.test;
    } else {
      return Fail(PGPC_ERR_INVALID_ARGUMENT, "unknown split '" + name + "'");
    }
    pgpc::DatasetExporter::Write(*dataset, path);
    return PGPC_OK;
  });
}

}  // extern "C"
