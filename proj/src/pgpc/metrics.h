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

#ifndef PGPC_METRICS_H_
#define PGPC_METRICS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pgpc/grid.h"
#include "pgpc/synth_data.h"
#include "pgpc/toy_model.h"

namespace pgpc {

// Confusion counts accumulated over a whole dataset, not per image.
struct IouResult {
  std::vector<int64_t> true_positives;
  std::vector<int64_t> false_positives;
  std::vector<int64_t> false_negatives;
  // TP / (TP + FP + FN) for classes present in the ground truth; nullopt for
  // classes that never occur in it.
  std::vector<std::optional<double>> per_class_iou;
  // Mean of the defined per-class values; 0 if none is defined.
  double miou = 0.0;
};

// Pixels whose ground truth is kIgnoreLabel are skipped. Throws
// Error(kInvalidArgument) on shape mismatches.
IouResult ComputeIou(std::span<const LabelGrid> predicted,
                     std::span<const LabelGrid> truth, int classes);

// Held-out evaluation: the one component allowed to read target labels.
class Evaluator {
 public:
  static IouResult Evaluate(const ToyModel& model, const Dataset& dataset);
};

}  // namespace pgpc

#endif  // PGPC_METRICS_H_
