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

#include "pgpc/pseudo_labeler.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pgpc/status.h"

namespace pgpc {
namespace {

void CheckEta(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) ThrowInvalidArgument("eta must be in (0, 1]");
}

double MaxProbability(std::span<const double> probs) {
  return *std::max_element(probs.begin(), probs.end());
}

// Picks `count` entries of `candidates` with the smallest score (ascending
// candidate order on ties) and marks them in `selection`.
void TakeSmallest(std::vector<int> candidates, const std::vector<double>& score,
                  int count, ReliableSelection* selection) {
  if (count <= 0) return;
  auto less = [&score](int a, int b) {
    return score[a] < score[b] || (score[a] == score[b] && a < b);
  };
  std::partial_sort(candidates.begin(), candidates.begin() + count,
                    candidates.end(), less);
  for (int i = 0; i < count; ++i) selection->mask[candidates[i]] = true;
  selection->selected += count;
}

}  // namespace

LabelGrid PseudoLabels(const ProbabilityGrid& probabilities) {
  return ArgmaxLabels(probabilities);
}

double QualityWeight(const ProbabilityGrid& probabilities, double kappa) {
  int confident = 0;
  for (int j = 0; j < probabilities.pixels(); ++j) {
    if (MaxProbability(probabilities.probs(j)) > kappa) ++confident;
  }
  return probabilities.pixels() == 0
             ? 0.0
             : static_cast<double>(confident) / probabilities.pixels();
}

std::vector<double> EntropyMap(const ProbabilityGrid& probabilities) {
  std::vector<double> entropy(probabilities.pixels(), 0.0);
  for (int j = 0; j < probabilities.pixels(); ++j) {
    double e = 0.0;
    for (double p : probabilities.probs(j)) {
      if (p > 0.0) e -= p * std::log(p);
    }
    entropy[j] = std::max(e, 0.0);
  }
  return entropy;
}

int ReliableCount(int pixels, double eta) {
  return static_cast<int>(std::lround(eta * pixels));
}

ReliableSelection ReliableMask(const std::vector<double>& entropy, double eta) {
  CheckEta(eta);
  if (entropy.empty()) ThrowInvalidArgument("reliable mask over empty grid");
  const int n = static_cast<int>(entropy.size());
  ReliableSelection selection;
  selection.mask.assign(n, false);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const int count = ReliableCount(n, eta);
  TakeSmallest(order, entropy, count, &selection);
  for (int j = 0; j < n; ++j) {
    if (selection.mask[j]) selection.gamma = std::max(selection.gamma, entropy[j]);
  }
  return selection;
}

ReliableSelection SelectReliable(const ProbabilityGrid& probabilities,
                                 const LabelGrid& labels,
                                 const std::vector<double>& entropy,
                                 double eta, SelectionStrategy strategy) {
  CheckEta(eta);
  const int n = probabilities.pixels();
  if (n == 0) ThrowInvalidArgument("reliable mask over empty grid");
  if (strategy == SelectionStrategy::kGlobalEntropy) {
    return ReliableMask(entropy, eta);
  }

  const bool by_entropy = strategy == SelectionStrategy::kClasswiseEntropy;
  // Smaller score = more reliable; confidence enters negated.
  std::vector<double> score(n);
  for (int j = 0; j < n; ++j) {
    score[j] = by_entropy ? entropy[j] : -MaxProbability(probabilities.probs(j));
  }

  ReliableSelection selection;
  selection.mask.assign(n, false);
  if (strategy == SelectionStrategy::kGlobalConfidence) {
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    TakeSmallest(std::move(all), score, ReliableCount(n, eta), &selection);
  } else {
    std::vector<std::vector<int>> per_class(probabilities.classes());
    for (int j = 0; j < n; ++j) per_class[labels.at(j)].push_back(j);
    for (auto& members : per_class) {
      const int count = ReliableCount(static_cast<int>(members.size()), eta);
      TakeSmallest(std::move(members), score, count, &selection);
    }
  }

  bool any = false;
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    if (!selection.mask[j]) continue;
    worst = any ? std::max(worst, score[j]) : score[j];
    any = true;
  }
  selection.gamma = by_entropy ? worst : -worst;
  if (!any) selection.gamma = 0.0;
  return selection;
}

PseudoLabelResult LabelTargetImage(const ProbabilityGrid& probabilities,
                                   const PgpcConfig& config) {
  PseudoLabelResult result;
  result.labels = PseudoLabels(probabilities);
  result.quality = QualityWeight(probabilities, config.kappa);
  result.entropy = EntropyMap(probabilities);
  ReliableSelection selection =
      SelectReliable(probabilities, result.labels, result.entropy, config.eta,
                     config.selection);
  result.reliable_mask = std::move(selection.mask);
  result.gamma = selection.gamma;
  return result;
}

}  // namespace pgpc
