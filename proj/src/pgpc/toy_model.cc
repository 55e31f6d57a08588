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

#include "pgpc/toy_model.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pgpc/status.h"

namespace pgpc {
namespace {

// Offsets of each parameter block inside the flat vector.
struct Layout {
  explicit Layout(const ModelShape& s)
      : w1(0),
        b1(w1 + s.hidden * s.features),
        wc(b1 + s.hidden),
        bc(wc + s.classes * s.hidden),
        wp(bc + s.classes),
        bp(wp + s.embed_dim * s.hidden) {}
  int w1, b1, wc, bc, wp, bp;
};

// tanh through a single exp.
double FastTanh(double a) {
  if (a > 20.0) return 1.0;
  if (a < -20.0) return -1.0;
  return 1.0 - 2.0 / (std::exp(2.0 * a) + 1.0);
}

// Column-major copy of a row-major rows x cols block.
std::vector<double> Transposed(const double* m, int rows, int cols) {
  std::vector<double> t(static_cast<size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) t[c * rows + r] = m[r * cols + c];
  }
  return t;
}

// out = b + W in, with W given transposed (cols x rows).
void Affine(const double* wt, const double* b, const double* in, int rows,
            int cols, double* out) {
  for (int r = 0; r < rows; ++r) out[r] = b[r];
  for (int c = 0; c < cols; ++c) {
    const double* col = wt + c * rows;
    const double v = in[c];
    for (int r = 0; r < rows; ++r) out[r] += col[r] * v;
  }
}

bool IsZero(std::span<const double> v) {
  for (double x : v) {
    if (x != 0.0) return false;
  }
  return true;
}

}  // namespace

ToyModel::ToyModel(ModelShape shape, std::vector<double> parameters)
    : shape_(shape), parameters_(std::move(parameters)) {
  if (static_cast<int>(parameters_.size()) != shape_.ParameterCount()) {
    ThrowInvalidArgument("parameter vector length does not match the model");
  }
}

ToyModel ToyModel::Initialize(const ModelShape& shape, Rng& rng) {
  std::vector<double> params(shape.ParameterCount(), 0.0);
  const Layout at(shape);
  auto fill = [&](int offset, int count, int fan_in) {
    const double bound = std::sqrt(3.0 / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (int i = 0; i < count; ++i) params[offset + i] = dist(rng);
  };
  fill(at.w1, shape.hidden * shape.features, shape.features);
  fill(at.wc, shape.classes * shape.hidden, shape.hidden);
  fill(at.wp, shape.embed_dim * shape.hidden, shape.hidden);
  return ToyModel(shape, std::move(params));
}

ForwardPass ToyModel::Forward(const RealGrid& features,
                              bool with_projection) const {
  if (features.depth() != shape_.features) {
    ThrowInvalidArgument("feature depth does not match the model");
  }
  const Layout at(shape_);
  const double* p = parameters_.data();
  const int h = features.height(), w = features.width();
  const std::vector<double> w1 =
      Transposed(p + at.w1, shape_.hidden, shape_.features);
  const std::vector<double> wc =
      Transposed(p + at.wc, shape_.classes, shape_.hidden);
  std::vector<double> wp;
  if (with_projection) {
    wp = Transposed(p + at.wp, shape_.embed_dim, shape_.hidden);
  }
  ForwardPass pass;
  pass.hidden = RealGrid(h, w, shape_.hidden);
  pass.logits = RealGrid(h, w, shape_.classes);
  if (with_projection) pass.projection = RealGrid(h, w, shape_.embed_dim);
  for (int j = 0; j < features.pixels(); ++j) {
    double* hid = pass.hidden.pixel(j).data();
    Affine(w1.data(), p + at.b1, features.pixel(j).data(), shape_.hidden,
           shape_.features, hid);
    for (int k = 0; k < shape_.hidden; ++k) hid[k] = FastTanh(hid[k]);
    Affine(wc.data(), p + at.bc, hid, shape_.classes, shape_.hidden,
           pass.logits.pixel(j).data());
    if (with_projection) {
      Affine(wp.data(), p + at.bp, hid, shape_.embed_dim, shape_.hidden,
             pass.projection.pixel(j).data());
    }
  }
  if (with_projection) pass.embedding = L2Normalize(pass.projection);
  return pass;
}

LabelGrid ToyModel::Predict(const RealGrid& features) const {
  const ForwardPass pass = Forward(features, /*with_projection=*/false);
  std::vector<int32_t> labels(features.pixels());
  for (int j = 0; j < features.pixels(); ++j) {
    labels[j] = ArgmaxIndex(pass.logits.pixel(j));
  }
  return LabelGrid(features.height(), features.width(), shape_.classes,
                   std::move(labels));
}

void ToyModel::Backward(const RealGrid& features, const ForwardPass& pass,
                        const RealGrid* grad_logits,
                        const RealGrid* grad_embedding,
                        std::span<double> grad) const {
  if (static_cast<int>(grad.size()) != shape_.ParameterCount()) {
    ThrowInvalidArgument("gradient buffer has the wrong length");
  }
  const Layout at(shape_);
  const double* p = parameters_.data();
  double* g = grad.data();
  std::vector<double> g_proj(shape_.embed_dim);
  std::vector<double> g_hidden(shape_.hidden);

  for (int j = 0; j < features.pixels(); ++j) {
    const bool has_logit = grad_logits && !IsZero(grad_logits->pixel(j));
    const bool has_embed = grad_embedding && !IsZero(grad_embedding->pixel(j));
    if (!has_logit && !has_embed) continue;

    const auto x = features.pixel(j);
    const auto hid = pass.hidden.pixel(j);
    std::fill(g_hidden.begin(), g_hidden.end(), 0.0);

    if (has_logit) {
      const auto gl = grad_logits->pixel(j);
      for (int c = 0; c < shape_.classes; ++c) {
        if (gl[c] == 0.0) continue;
        double* gw = g + at.wc + c * shape_.hidden;
        const double* w = p + at.wc + c * shape_.hidden;
        for (int k = 0; k < shape_.hidden; ++k) {
          gw[k] += gl[c] * hid[k];
          g_hidden[k] += gl[c] * w[k];
        }
        g[at.bc + c] += gl[c];
      }
    }

    if (has_embed) {
      // d z / d u = (I - z z^T) / |u| for z = u / |u|.
      const auto ge = grad_embedding->pixel(j);
      const auto u = pass.projection.pixel(j);
      const auto z = pass.embedding.vector(j);
      const double norm = std::sqrt(Dot(u, u));
      if (norm >= std::numeric_limits<double>::min()) {
        const double radial = Dot(z, ge);
        for (int d = 0; d < shape_.embed_dim; ++d) {
          g_proj[d] = (ge[d] - z[d] * radial) / norm;
        }
        for (int d = 0; d < shape_.embed_dim; ++d) {
          double* gw = g + at.wp + d * shape_.hidden;
          const double* w = p + at.wp + d * shape_.hidden;
          for (int k = 0; k < shape_.hidden; ++k) {
            gw[k] += g_proj[d] * hid[k];
            g_hidden[k] += g_proj[d] * w[k];
          }
          g[at.bp + d] += g_proj[d];
        }
      }
    }

    for (int k = 0; k < shape_.hidden; ++k) {
      const double g_pre = g_hidden[k] * (1.0 - hid[k] * hid[k]);
      double* gw = g + at.w1 + k * shape_.features;
      for (int f = 0; f < shape_.features; ++f) gw[f] += g_pre * x[f];
      g[at.b1 + k] += g_pre;
    }
  }
}

}  // namespace pgpc
