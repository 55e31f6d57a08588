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

#ifndef PGPC_TOY_MODEL_H_
#define PGPC_TOY_MODEL_H_

#include <span>
#include <vector>

#include "pgpc/embedding_list.h"
#include "pgpc/grid.h"

namespace pgpc {

// Per-pixel network: features -> tanh hidden layer -> {segmentation logits,
// projection}. The projection is l2-normalized into the contrast space.
struct ModelShape {
  int features = 4;
  int hidden = 32;
  int classes = 5;
  int embed_dim = 16;

  int ParameterCount() const {
    return hidden * features + hidden + classes * hidden + classes +
           embed_dim * hidden + embed_dim;
  }
  bool operator==(const ModelShape&) const = default;
};

struct ForwardPass {
  RealGrid hidden;
  RealGrid logits;
  RealGrid projection;  // before normalization
  EmbeddingGrid embedding;
};

class ToyModel {
 public:
  ToyModel() = default;
  // Throws Error(kInvalidArgument) if `parameters` has the wrong length.
  ToyModel(ModelShape shape, std::vector<double> parameters);

  // Scaled-uniform (fan-in) weights and zero biases.
  static ToyModel Initialize(const ModelShape& shape, Rng& rng);

  const ModelShape& shape() const { return shape_; }
  std::span<const double> parameters() const { return parameters_; }
  std::vector<double>& mutable_parameters() { return parameters_; }

  // Skipping the projection head leaves `projection` and `embedding` empty.
  ForwardPass Forward(const RealGrid& features,
                      bool with_projection = true) const;
  LabelGrid Predict(const RealGrid& features) const;

  // Accumulates d loss / d parameters into `grad` given upstream gradients
  // w.r.t. the logits and/or the normalized embeddings (either may be null).
  void Backward(const RealGrid& features, const ForwardPass& pass,
                const RealGrid* grad_logits, const RealGrid* grad_embedding,
                std::span<double> grad) const;

  bool operator==(const ToyModel&) const = default;

 private:
  ModelShape shape_;
  std::vector<double> parameters_;
};

}  // namespace pgpc

#endif  // PGPC_TOY_MODEL_H_
