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

#include "pgpc/synth_data.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "pgpc/grid_io.h"
#include "pgpc/status.h"

namespace pgpc {
namespace {

// Stream ids for the per-split seeds derived from one experiment seed.
constexpr uint64_t kSourceStream = 0x5352435F;
constexpr uint64_t kTargetStream = 0x5447545F;
constexpr uint64_t kTestStream = 0x5445535F;

constexpr int kMaxLayoutAttempts = 1000;

uint64_t DeriveSeed(uint64_t seed, uint64_t stream) {
  Rng rng = MakeRng(seed, stream);
  return rng();
}

}  // namespace

ShiftDescriptor ShiftDescriptor::Identity(int features) {
  ShiftDescriptor shift;
  shift.translation.assign(features, 0.0);
  return shift;
}

void ShiftDescriptor::Apply(std::span<double> x) const {
  const double c = std::cos(rotation_rad);
  const double s = std::sin(rotation_rad);
  for (size_t d = 0; d + 1 < x.size(); d += 2) {
    const double a = x[d];
    const double b = x[d + 1];
    x[d] = c * a - s * b;
    x[d + 1] = s * a + c * b;
  }
  for (size_t d = 0; d < x.size(); ++d) x[d] += translation[d];
}

void ShiftDescriptor::ApplyInverse(std::span<double> x) const {
  for (size_t d = 0; d < x.size(); ++d) x[d] -= translation[d];
  const double c = std::cos(rotation_rad);
  const double s = std::sin(rotation_rad);
  for (size_t d = 0; d + 1 < x.size(); d += 2) {
    const double a = x[d];
    const double b = x[d + 1];
    x[d] = c * a + s * b;
    x[d + 1] = -s * a + c * b;
  }
}

bool ShiftDescriptor::IsIdentity() const {
  return rotation_rad == 0.0 && noise_scale == 1.0 &&
         std::all_of(translation.begin(), translation.end(),
                     [](double t) { return t == 0.0; });
}

SyntheticTask MakeTask(const TaskConfig& config, uint64_t seed) {
  config.Validate();
  SyntheticTask task;
  task.classes = config.classes;
  task.features = config.features;
  task.height = config.height;
  task.width = config.width;
  task.sites = config.sites;
  task.require_all_classes = config.require_all_classes;
  task.class_means.assign(static_cast<size_t>(config.classes) * config.features,
                          0.0);
  for (int c = 0; c < config.classes; ++c) {
    const double angle = 2.0 * std::numbers::pi * c / config.classes;
    for (int d = 0; d < config.features; ++d) {
      const int pair = d / 2;
      const int frequency = pair % 2 + 1;
      const double radius = config.mean_radius / frequency;
      const double phase = frequency * angle;
      task.class_means[static_cast<size_t>(c) * config.features + d] =
          radius * (d % 2 == 0 ? std::cos(phase) : std::sin(phase));
    }
  }
  task.class_spreads.assign(config.classes, config.spread);
  task.shift.rotation_rad = config.rotation_deg * std::numbers::pi / 180.0;
  task.shift.translation.assign(config.features,
                                config.translation * config.spread);
  task.shift.noise_scale = config.noise_scale;
  task.source_seed = DeriveSeed(seed, kSourceStream);
  task.target_seed = DeriveSeed(seed, kTargetStream);
  task.test_seed = DeriveSeed(seed, kTestStream);
  return task;
}

std::string ToString(Split split) {
  switch (split) {
    case Split::kSource:
      return "source";
    case Split::kTarget:
      return "target";
    case Split::kTest:
      return "test";
  }
  return "source";
}

Dataset::Dataset(Domain domain, Split split, std::vector<RealGrid> features,
                 std::vector<LabelGrid> labels)
    : domain_(domain), split_(split), features_(std::move(features)),
      labels_(std::move(labels)), audit_(std::make_shared<LabelAudit>()) {
  if (features_.size() != labels_.size()) {
    ThrowInvalidArgument("dataset features and labels differ in count");
  }
}

const LabelGrid& Dataset::TrainingLabels(int i) const {
  if (domain_ != Domain::kSource) {
    audit_->violations.fetch_add(1);
    throw Error(ErrorCode::kRuntime,
                "target-domain labels are not readable on the training path");
  }
  audit_->training_reads.fetch_add(1);
  return labels_.at(i);
}

const LabelGrid& Dataset::Labels(int i, const LabelAccessKey& key) const {
  if (key.purpose_ == LabelAccessKey::Purpose::kEvaluation) {
    audit_->evaluation_reads.fetch_add(1);
  } else {
    audit_->export_reads.fetch_add(1);
  }
  return labels_.at(i);
}

LabelGrid GenerateLayout(const SyntheticTask& task, Rng& rng) {
  std::uniform_real_distribution<double> row(0.0, task.height);
  std::uniform_real_distribution<double> col(0.0, task.width);
  std::uniform_int_distribution<int> any_class(0, task.classes - 1);
  std::vector<double> site_row(task.sites), site_col(task.sites);
  std::vector<int> site_class(task.sites);
  std::vector<int32_t> labels(static_cast<size_t>(task.height) * task.width);

  for (int attempt = 0; attempt < kMaxLayoutAttempts; ++attempt) {
    std::vector<int> classes(task.classes);
    std::iota(classes.begin(), classes.end(), 0);
    std::shuffle(classes.begin(), classes.end(), rng);
    for (int s = 0; s < task.sites; ++s) {
      site_row[s] = row(rng);
      site_col[s] = col(rng);
      site_class[s] = (task.require_all_classes && s < task.classes)
                          ? classes[s]
                          : any_class(rng);
    }
    std::vector<bool> present(task.classes, false);
    for (int r = 0; r < task.height; ++r) {
      for (int c = 0; c < task.width; ++c) {
        const double y = r + 0.5;
        const double x = c + 0.5;
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int s = 0; s < task.sites; ++s) {
          const double d = (site_row[s] - y) * (site_row[s] - y) +
                           (site_col[s] - x) * (site_col[s] - x);
          if (d < best_d) {
            best_d = d;
            best = s;
          }
        }
        labels[static_cast<size_t>(r) * task.width + c] = site_class[best];
        present[site_class[best]] = true;
      }
    }
    if (!task.require_all_classes ||
        std::all_of(present.begin(), present.end(), [](bool p) { return p; })) {
      return LabelGrid(task.height, task.width, task.classes, labels);
    }
  }
  throw Error(ErrorCode::kRuntime,
              "could not draw a layout containing every class");
}

Dataset Generate(const SyntheticTask& task, Split split, int count) {
  if (count < 1) ThrowInvalidArgument("dataset count must be >= 1");
  const bool shifted = split != Split::kSource;
  const uint64_t seed = split == Split::kSource   ? task.source_seed
                        : split == Split::kTarget ? task.target_seed
                                                  : task.test_seed;
  std::vector<RealGrid> features;
  std::vector<LabelGrid> labels;
  features.reserve(count);
  labels.reserve(count);
  for (int i = 0; i < count; ++i) {
    Rng rng = MakeRng(seed, static_cast<uint64_t>(i));
    LabelGrid layout = GenerateLayout(task, rng);
    RealGrid x(task.height, task.width, task.features);
    for (int j = 0; j < layout.pixels(); ++j) {
      const int c = layout.at(j);
      const double sigma =
          task.class_spreads[c] * (shifted ? task.shift.noise_scale : 1.0);
      auto v = x.pixel(j);
      const auto mu = task.mean(c);
      for (int d = 0; d < task.features; ++d) {
        std::normal_distribution<double> noise(0.0, 1.0);
        v[d] = mu[d] + sigma * noise(rng);
      }
      if (shifted) task.shift.Apply(v);
    }
    features.push_back(std::move(x));
    labels.push_back(std::move(layout));
  }
  return Dataset(shifted ? Domain::kTarget : Domain::kSource, split,
                 std::move(features), std::move(labels));
}

void DatasetExporter::Write(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowIoError("cannot open '" + path + "' for writing");
  const LabelAccessKey key(LabelAccessKey::Purpose::kExport);
  for (int i = 0; i < dataset.size(); ++i) {
    WriteGrid(out, dataset.features(i));
    WriteGrid(out, dataset.Labels(i, key));
  }
  if (!out) ThrowIoError("failed writing '" + path + "'");
}

}  // namespace pgpc
