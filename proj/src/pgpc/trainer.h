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

#ifndef PGPC_TRAINER_H_
#define PGPC_TRAINER_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pgpc/config.h"
#include "pgpc/losses.h"
#include "pgpc/metrics.h"
#include "pgpc/sampler.h"
#include "pgpc/synth_data.h"
#include "pgpc/toy_model.h"

namespace pgpc {

// teacher <- alpha * teacher + (1 - alpha) * student. Throws
// Error(kInvalidArgument) on a length mismatch or alpha outside (0, 1).
void EmaUpdate(std::span<double> teacher, std::span<const double> student,
               double alpha);

ModelShape ShapeFor(const ExperimentConfig& config);

struct TrainState {
  ExperimentConfig config;
  uint64_t seed = 0;
  ToyModel student;
  ToyModel teacher;
  int64_t iteration = 0;
  // Mini-batch selection only. Runs that differ only in contrast settings
  // see identical batches.
  Rng data_rng;
  // Anchor/negative subsampling and bank pushes.
  Rng sample_rng;
  MemoryBanks banks;

  bool operator==(const TrainState&) const = default;
};

// Parameter gradients of one step, split by loss term (each unweighted) and
// as applied (weighted sum from a single combined backward pass).
struct StepGradients {
  std::vector<double> source;
  std::vector<double> target;
  std::vector<double> contrastive;
  std::vector<double> total;
  LossReport report;
};

struct SplitData {
  std::shared_ptr<const Dataset> source;
  std::shared_ptr<const Dataset> target;
  std::shared_ptr<const Dataset> test;
};

// Generates the three splits of the task described by `config` for `seed`.
SplitData MakeSplits(const ExperimentConfig& config, uint64_t seed);

class Trainer {
 public:
  // Validates the config, generates the task data and initializes the
  // student (teacher starts as an exact copy).
  Trainer(const ExperimentConfig& config, uint64_t seed);
  Trainer(const ExperimentConfig& config, uint64_t seed, SplitData data);

  // One iteration: teacher inference, pseudo-labels, contrast sampling,
  // losses, SGD on the student, EMA on the teacher, bank pushes.
  LossReport Step();

  // Runs the forward/backward part of the next step and reports the
  // per-term gradients without touching the models. Consumes random numbers
  // like Step() would, so call it on a copy to keep a trainer unchanged.
  StepGradients ComputeStepGradients();

  // Steps until iteration() == last (exclusive bound); calls `on_step`
  // after each step when set.
  void RunUntil(int64_t last,
                const std::function<void(const LossReport&)>& on_step = {});

  IouResult Evaluate() const;

  void SaveCheckpoint(const std::string& path) const;
  static Trainer LoadCheckpoint(const std::string& path);

  const TrainState& state() const { return state_; }
  int64_t iteration() const { return state_.iteration; }
  const SplitData& data() const { return data_; }

  // Learning rate applied at `iteration`.
  double LearningRate(int64_t iteration) const;

 private:
  Trainer(TrainState state, SplitData data);

  StepGradients Compute(bool split_terms);
  void PushBanks();

  TrainState state_;
  SplitData data_;

  // Teacher outputs cached by Compute() for the bank pushes in Step().
  struct Cache {
    std::vector<EmbeddingGrid> teacher_source;
    std::vector<EmbeddingGrid> teacher_target;
    std::vector<LabelGrid> source_labels;
    std::vector<PseudoLabelResult> pseudo;
    std::vector<CategoryOrderGrid> order;
  };
  Cache cache_;
};

struct FitResult {
  std::vector<double> parameters;
  std::vector<LossReport> history;
  IouResult evaluation;
};

FitResult Fit(const ExperimentConfig& config, uint64_t seed);
FitResult Fit(const ExperimentConfig& config, uint64_t seed, SplitData data);

}  // namespace pgpc

#endif  // PGPC_TRAINER_H_
