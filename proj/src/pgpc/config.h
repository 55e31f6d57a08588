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

#ifndef PGPC_CONFIG_H_
#define PGPC_CONFIG_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pgpc {

// Which memory bank supplies the class prototype (positive sample).
enum class PositiveSource {
  kSource,  // SP
  kTarget,  // TP
};

// How reliable target pixels are chosen from teacher predictions.
enum class SelectionStrategy {
  kGlobalEntropy,
  kGlobalConfidence,
  kClasswiseEntropy,
  kClasswiseConfidence,
};

// Pixel reduction for the cross-entropy terms. kSum is the literal
// sum-over-pixels, mean-over-images form; kMean additionally divides by the
// pixel count.
enum class CeReduction {
  kMean,
  kSum,
};

struct PgpcConfig {
  double tau = 0.5;
  double lambda_t = 1.0;
  double lambda_c = 0.1;
  double eta = 0.5;
  int rank_r = 4;
  double kappa = 0.968;
  double alpha = 0.999;
  int anchors_per_class = 256;
  int negatives_per_anchor = 512;
  int64_t total_iters = 600;
  // Unset means total_iters / 3.
  std::optional<int64_t> warmup_iters;
  int bank_capacity = 1024;
  int bank_push_per_class = 32;

  PositiveSource positive = PositiveSource::kSource;
  bool use_source_negatives = true;
  bool use_target_negatives = true;
  SelectionStrategy selection = SelectionStrategy::kGlobalEntropy;

  int batch_size = 4;
  double learning_rate = 0.05;
  // Linear learning-rate warmup over this fraction of total_iters.
  double lr_warmup_fraction = 0.05;
  CeReduction ce_reduction = CeReduction::kMean;
  // EMA decay at step t (0-based) becomes min(alpha, 1 - 1/(t+2)); the early
  // teacher is then the running mean of the students seen so far.
  bool ema_ramp = true;

  uint64_t rng_seed = 0;

  int64_t EffectiveWarmup() const {
    return warmup_iters.value_or(total_iters / 3);
  }
  bool ContrastiveEnabled() const { return lambda_c > 0.0; }

  // Throws Error(kConfig) describing the first violated constraint.
  void Validate(int num_classes) const;

  bool operator==(const PgpcConfig&) const = default;
};

// Synthetic source/target task description.
struct TaskConfig {
  int classes = 5;
  int features = 4;
  int height = 16;
  int width = 16;
  int sites = 10;
  int source_images = 64;
  int target_images = 64;
  int test_images = 32;
  // Class means lie on circles of these radii, see synth_data.h.
  double mean_radius = 2.0;
  double spread = 0.6;
  double rotation_deg = 25.0;
  // Translation along every feature axis, in units of `spread`.
  double translation = 0.5;
  double noise_scale = 1.3;
  bool require_all_classes = true;

  void Validate() const;

  bool operator==(const TaskConfig&) const = default;
};

struct ModelConfig {
  int hidden = 32;
  int embed_dim = 16;

  void Validate() const;

  bool operator==(const ModelConfig&) const = default;
};

struct ExperimentConfig {
  PgpcConfig pgpc;
  TaskConfig task;
  ModelConfig model;

  void Validate() const;

  bool operator==(const ExperimentConfig&) const = default;

  // Applies one `key = value` assignment. Keys are listed by Keys(). Throws
  // Error(kConfig) on unknown keys or unparsable values.
  void Set(const std::string& key, const std::string& value);
  std::string Get(const std::string& key) const;

  // Canonical text form: one `key = value` line per key, sorted by key,
  // doubles printed round-trip exact.
  std::string ToText() const;
  // 64-bit FNV-1a of ToText().
  uint64_t Hash() const;

  static std::vector<std::string> Keys();
  static ExperimentConfig FromText(const std::string& text);
  static ExperimentConfig FromFile(const std::string& path);
};

std::string ToString(SelectionStrategy strategy);
SelectionStrategy ParseSelectionStrategy(const std::string& text);

// Parses variant strings such as "sp+sn+tn" or "tp,tn" into the config.
void ApplyVariant(const std::string& text, PgpcConfig* config);
std::string VariantName(const PgpcConfig& config);

// Config-file grammar: each non-blank line is `key = value`; `#` starts a
// comment; surrounding whitespace is ignored; later assignments win.
std::vector<std::pair<std::string, std::string>> ParseKeyValueText(
    const std::string& text);

}  // namespace pgpc

#endif  // PGPC_CONFIG_H_
