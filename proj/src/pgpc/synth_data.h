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

#ifndef PGPC_SYNTH_DATA_H_
#define PGPC_SYNTH_DATA_H_

// Seeded source/target pixel-grid datasets with a controllable covariate
// shift. Labels form Voronoi regions; each pixel's features are drawn from
// its class's isotropic Gaussian, and target features are additionally
// passed through an affine shift with inflated noise.

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pgpc/config.h"
#include "pgpc/embedding_list.h"
#include "pgpc/grid.h"

namespace pgpc {

// x -> R x + b, where R rotates each consecutive feature pair (0,1), (2,3),
// ... by the same angle; an odd trailing feature is left unrotated.
struct ShiftDescriptor {
  double rotation_rad = 0.0;
  std::vector<double> translation;
  // Multiplies the class spread of target samples before the affine map.
  double noise_scale = 1.0;

  static ShiftDescriptor Identity(int features);

  void Apply(std::span<double> x) const;
  void ApplyInverse(std::span<double> x) const;
  bool IsIdentity() const;
};

struct SyntheticTask {
  int classes = 0;
  int features = 0;
  int height = 0;
  int width = 0;
  int sites = 0;
  // classes x features, row-major.
  std::vector<double> class_means;
  std::vector<double> class_spreads;
  ShiftDescriptor shift;
  bool require_all_classes = true;
  uint64_t source_seed = 0;
  uint64_t target_seed = 0;
  uint64_t test_seed = 0;

  std::span<const double> mean(int cls) const {
    return {class_means.data() + static_cast<size_t>(cls) * features,
            static_cast<size_t>(features)};
  }
};

// The default task: class c's mean is
//   radius * (cos a_c, sin a_c, cos 2a_c / 2, sin 2a_c / 2, ...)
// with a_c = 2 pi c / C, cycling frequencies over feature pairs. Each split
// gets its own seed derived from `seed`.
SyntheticTask MakeTask(const TaskConfig& config, uint64_t seed);

enum class Split {
  kSource,
  kTarget,
  kTest,
};

std::string ToString(Split split);

// Counts label reads on a dataset by who performed them.
struct LabelAudit {
  std::atomic<int64_t> training_reads{0};
  std::atomic<int64_t> evaluation_reads{0};
  std::atomic<int64_t> export_reads{0};
  // Attempts to read target-domain labels through the training path.
  std::atomic<int64_t> violations{0};
};

class Evaluator;
class DatasetExporter;

// Key that unlocks target-domain labels. Only the evaluator and the dataset
// exporter can mint one.
class LabelAccessKey {
 private:
  enum class Purpose { kEvaluation, kExport };
  explicit LabelAccessKey(Purpose purpose) : purpose_(purpose) {}
  Purpose purpose_;

  friend class Evaluator;
  friend class DatasetExporter;
  friend class Dataset;
};

class Dataset {
 public:
  Dataset(Domain domain, Split split, std::vector<RealGrid> features,
          std::vector<LabelGrid> labels);

  Domain domain() const { return domain_; }
  Split split() const { return split_; }
  int size() const { return static_cast<int>(features_.size()); }
  const RealGrid& features(int i) const { return features_.at(i); }

  // Ground truth on the training path. Only source-domain labels are
  // available here; on a target-domain dataset the read is recorded as a
  // violation and Error(kRuntime) is thrown.
  const LabelGrid& TrainingLabels(int i) const;
  const LabelGrid& Labels(int i, const LabelAccessKey& key) const;

  const LabelAudit& audit() const { return *audit_; }

 private:
  Domain domain_;
  Split split_;
  std::vector<RealGrid> features_;
  std::vector<LabelGrid> labels_;
  std::shared_ptr<LabelAudit> audit_;
};

// Voronoi label layout for one image; every class appears at least once
// when task.require_all_classes is set.
LabelGrid GenerateLayout(const SyntheticTask& task, Rng& rng);

Dataset Generate(const SyntheticTask& task, Split split, int count);

// Writes features and labels of every image as alternating grid records.
class DatasetExporter {
 public:
  static void Write(const Dataset& dataset, const std::string& path);
};

}  // namespace pgpc

#endif  // PGPC_SYNTH_DATA_H_
