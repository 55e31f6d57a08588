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

#ifndef PGPC_PSEUDO_LABELER_H_
#define PGPC_PSEUDO_LABELER_H_

// Teacher-side pseudo-labels, per-image quality weights and reliable-pixel
// selection.

#include <vector>

#include "pgpc/config.h"
#include "pgpc/grid.h"

namespace pgpc {

struct ReliableSelection {
  std::vector<bool> mask;
  // Score of the last selected pixel: entropy for entropy strategies,
  // confidence for confidence strategies. 0 for an empty selection.
  double gamma = 0.0;
  int selected = 0;
};

struct PseudoLabelResult {
  LabelGrid labels;
  double quality = 0.0;
  std::vector<double> entropy;
  std::vector<bool> reliable_mask;
  double gamma = 0.0;
};

// Per-pixel argmax of the teacher's probabilities (lowest index on ties).
LabelGrid PseudoLabels(const ProbabilityGrid& probabilities);

// Fraction of pixels whose max probability strictly exceeds kappa.
double QualityWeight(const ProbabilityGrid& probabilities, double kappa);

// E_j = -sum_c P_c log P_c with 0 log 0 := 0.
std::vector<double> EntropyMap(const ProbabilityGrid& probabilities);

// Selects exactly round(eta * n) pixels with the smallest entropy; ties go to
// the lower pixel index. Throws Error(kInvalidArgument) on an empty map or
// eta outside (0, 1].
ReliableSelection ReliableMask(const std::vector<double>& entropy, double eta);

// Number of pixels ReliableMask selects out of `pixels`.
int ReliableCount(int pixels, double eta);

// Reliable-pixel selection under any of the four strategies. Global
// strategies rank all pixels of the image jointly; class-wise strategies
// select round(eta * n_c) pixels within each pseudo-class c.
ReliableSelection SelectReliable(const ProbabilityGrid& probabilities,
                                 const LabelGrid& labels,
                                 const std::vector<double>& entropy,
                                 double eta, SelectionStrategy strategy);

// Full teacher-side pass over one target image.
PseudoLabelResult LabelTargetImage(const ProbabilityGrid& probabilities,
                                   const PgpcConfig& config);

}  // namespace pgpc

#endif  // PGPC_PSEUDO_LABELER_H_
