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

#include "pgpc/metrics.h"

#include "pgpc/status.h"

namespace pgpc {

IouResult ComputeIou(std::span<const LabelGrid> predicted,
                     std::span<const LabelGrid> truth, int classes) {
  if (predicted.size() != truth.size()) {
    ThrowInvalidArgument("prediction and ground-truth counts differ");
  }
  IouResult result;
  result.true_positives.assign(classes, 0);
  result.false_positives.assign(classes, 0);
  result.false_negatives.assign(classes, 0);
  for (size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i].pixels() != truth[i].pixels()) {
      ThrowInvalidArgument("prediction and ground truth differ in shape");
    }
    for (int j = 0; j < truth[i].pixels(); ++j) {
      const int32_t y = truth[i].at(j);
      if (y == kIgnoreLabel) continue;
      const int32_t p = predicted[i].at(j);
      if (p == y) {
        ++result.true_positives[y];
      } else {
        ++result.false_negatives[y];
        if (p >= 0 && p < classes) ++result.false_positives[p];
      }
    }
  }

  result.per_class_iou.assign(classes, std::nullopt);
  double sum = 0.0;
  int defined = 0;
  for (int c = 0; c < classes; ++c) {
    const int64_t tp = result.true_positives[c];
    const int64_t fn = result.false_negatives[c];
    if (tp + fn == 0) continue;
    const double iou = static_cast<double>(tp) /
                       static_cast<double>(tp + result.false_positives[c] + fn);
    result.per_class_iou[c] = iou;
    sum += iou;
    ++defined;
  }
  result.miou = defined > 0 ? sum / defined : 0.0;
  return result;
}

IouResult Evaluator::Evaluate(const ToyModel& model, const Dataset& dataset) {
  const LabelAccessKey key(LabelAccessKey::Purpose::kEvaluation);
  std::vector<LabelGrid> predicted;
  std::vector<LabelGrid> truth;
  predicted.reserve(dataset.size());
  truth.reserve(dataset.size());
  for (int i = 0; i < dataset.size(); ++i) {
    predicted.push_back(model.Predict(dataset.features(i)));
    truth.push_back(dataset.Labels(i, key));
  }
  return ComputeIou(predicted, truth, model.shape().classes);
}

}  // namespace pgpc
