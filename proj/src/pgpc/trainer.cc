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

#include "pgpc/trainer.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pgpc/grid_io.h"
#include "pgpc/status.h"

namespace pgpc {
namespace {

constexpr uint32_t kCheckpointMagic = 0x4B434750;  // "PGCK"
constexpr uint32_t kCheckpointVersion = 1;

// RNG stream ids derived from the run seed.
constexpr uint64_t kInitStream = 1;
constexpr uint64_t kDataStream = 2;
constexpr uint64_t kSampleStream = 3;

std::string RngToString(const Rng& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

Rng RngFromString(const std::string& text) {
  Rng rng;
  std::istringstream in(text);
  in >> rng;
  if (!in) ThrowIoError("corrupt RNG state in checkpoint");
  return rng;
}

MemoryBanks MakeBanks(const ExperimentConfig& config) {
  const int classes = config.task.classes;
  const int capacity = config.pgpc.bank_capacity;
  const int dim = config.model.embed_dim;
  const Domain prototype_domain =
      config.pgpc.positive == PositiveSource::kSource ? Domain::kSource
                                                      : Domain::kTarget;
  return {ClassMemoryBank(classes, capacity, dim, prototype_domain),
          ClassMemoryBank(classes, capacity, dim, Domain::kSource),
          ClassMemoryBank(classes, capacity, dim, Domain::kTarget)};
}

// Draws up to `k` rows of `pool` and appends them to bank class `cls`.
void PushSample(const EmbeddingList& pool, int k, int cls, Rng& rng,
                ClassMemoryBank* bank) {
  if (pool.empty() || k == 0) return;
  bank->Push(cls, Subsample(pool, k, rng));
}

void Axpy(double a, std::span<const double> x, std::span<double> y) {
  for (size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

}  // namespace

void EmaUpdate(std::span<double> teacher, std::span<const double> student,
               double alpha) {
  if (teacher.size() != student.size()) {
    ThrowInvalidArgument("EMA update: parameter lengths differ");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    ThrowInvalidArgument("EMA update: alpha must be in (0, 1)");
  }
  for (size_t i = 0; i < teacher.size(); ++i) {
    teacher[i] = alpha * teacher[i] + (1.0 - alpha) * student[i];
  }
}

ModelShape ShapeFor(const ExperimentConfig& config) {
  return {config.task.features, config.model.hidden, config.task.classes,
          config.model.embed_dim};
}

SplitData MakeSplits(const ExperimentConfig& config, uint64_t seed) {
  const SyntheticTask task = MakeTask(config.task, seed);
  SplitData data;
  data.source = std::make_shared<const Dataset>(
      Generate(task, Split::kSource, config.task.source_images));
  data.target = std::make_shared<const Dataset>(
      Generate(task, Split::kTarget, config.task.target_images));
  data.test = std::make_shared<const Dataset>(
      Generate(task, Split::kTest, config.task.test_images));
  return data;
}

Trainer::Trainer(const ExperimentConfig& config, uint64_t seed)
    : Trainer(config, seed, MakeSplits(config, seed)) {}

Trainer::Trainer(const ExperimentConfig& config, uint64_t seed, SplitData data)
    : data_(std::move(data)) {
  config.Validate();
  if (!data_.source || !data_.target || data_.source->size() < 1 ||
      data_.target->size() < 1) {
    ThrowInvalidArgument("trainer needs non-empty source and target data");
  }
  if (data_.source->domain() != Domain::kSource ||
      data_.target->domain() != Domain::kTarget) {
    ThrowInvalidArgument("trainer datasets have the wrong domains");
  }
  state_.config = config;
  state_.config.pgpc.rng_seed = seed;
  state_.seed = seed;
  Rng init = MakeRng(seed, kInitStream);
  state_.student = ToyModel::Initialize(ShapeFor(config), init);
  state_.teacher = state_.student;
  state_.data_rng = MakeRng(seed, kDataStream);
  state_.sample_rng = MakeRng(seed, kSampleStream);
  state_.banks = MakeBanks(config);
}

Trainer::Trainer(TrainState state, SplitData data)
    : state_(std::move(state)), data_(std::move(data)) {}

double Trainer::LearningRate(int64_t iteration) const {
  const PgpcConfig& c = state_.config.pgpc;
  const double warmup =
      std::ceil(c.lr_warmup_fraction * static_cast<double>(c.total_iters));
  if (warmup < 1.0) return c.learning_rate;
  return c.learning_rate *
         std::min(1.0, static_cast<double>(iteration + 1) / warmup);
}

StepGradients Trainer::Compute(bool split_terms) {
  const PgpcConfig& config = state_.config.pgpc;
  const int classes = state_.config.task.classes;
  const int batch = config.batch_size;
  const bool contrastive_on = config.ContrastiveEnabled();

  std::uniform_int_distribution<int> pick_source(0, data_.source->size() - 1);
  std::uniform_int_distribution<int> pick_target(0, data_.target->size() - 1);
  std::vector<int> source_ids(batch), target_ids(batch);
  for (int& i : source_ids) i = pick_source(state_.data_rng);
  for (int& i : target_ids) i = pick_target(state_.data_rng);

  cache_ = Cache{};
  std::vector<ForwardPass> student_source, student_target;
  std::vector<ProbabilityGrid> source_probs, target_probs;
  for (int b = 0; b < batch; ++b) {
    const RealGrid& xs = data_.source->features(source_ids[b]);
    const RealGrid& xt = data_.target->features(target_ids[b]);
    cache_.source_labels.push_back(data_.source->TrainingLabels(source_ids[b]));

    ForwardPass teacher_t = state_.teacher.Forward(xt);
    const ProbabilityGrid teacher_probs = Softmax(teacher_t.logits);
    cache_.pseudo.push_back(LabelTargetImage(teacher_probs, config));
    if (contrastive_on) {
      cache_.order.push_back(CategoryOrder(teacher_probs));
      cache_.teacher_target.push_back(std::move(teacher_t.embedding));
      cache_.teacher_source.push_back(state_.teacher.Forward(xs).embedding);
    }

    student_source.push_back(state_.student.Forward(xs, false));
    student_target.push_back(state_.student.Forward(xt, contrastive_on));
    source_probs.push_back(Softmax(student_source.back().logits));
    target_probs.push_back(Softmax(student_target.back().logits));
  }

  const CrossEntropyResult ls =
      SourceCrossEntropy(source_probs, cache_.source_labels, config.ce_reduction);
  const CrossEntropyResult lt =
      TargetCrossEntropy(target_probs, cache_.pseudo, config.ce_reduction);

  StepGradients out;
  LossReport& report = out.report;
  report.iteration = state_.iteration;
  report.l_s = ls.loss;
  report.l_t = lt.loss;
  report.per_class_contrastive.assign(classes, 0.0);

  // d L_c / d z for every student target pixel.
  std::vector<RealGrid> grad_embedding;
  const bool active = ContrastiveActive(config, state_.iteration);
  if (active) {
    std::vector<EmbeddingGrid> anchors_from;
    anchors_from.reserve(batch);
    for (const ForwardPass& pass : student_target) {
      anchors_from.push_back(pass.embedding);
    }
    const ContrastiveInputs inputs{anchors_from, cache_.teacher_source,
                                   cache_.teacher_target, cache_.source_labels,
                                   cache_.pseudo, cache_.order};
    const SampleBatch samples = BuildSampleBatch(
        inputs, state_.banks, config, classes, state_.sample_rng);
    const InfoNceResult lc = InfoNce(samples, config.tau, classes);
    report.l_c = lc.loss;
    report.per_class_contrastive = lc.per_class;
    report.anchors_used = lc.anchors_used;
    report.negatives_used = lc.negatives_used;
    report.skipped_classes = lc.skipped_classes;

    for (const ForwardPass& pass : student_target) {
      grad_embedding.emplace_back(pass.embedding.height(),
                                  pass.embedding.width(),
                                  pass.embedding.dim());
    }
    for (size_t k = 0; k < samples.classes.size(); ++k) {
      const ClassSamples& s = samples.classes[k];
      const std::vector<double>& g = lc.anchor_grad[k];
      if (g.empty()) continue;
      for (int m = 0; m < s.anchors.size(); ++m) {
        const PixelRef& ref = s.anchors.ref(m);
        auto dst = grad_embedding[ref.image].pixel(static_cast<int>(ref.pixel));
        for (int d = 0; d < s.anchors.dim(); ++d) {
          dst[d] += g[static_cast<size_t>(m) * s.anchors.dim() + d];
        }
      }
    }
  }
  report.total =
      TotalLoss(report.l_s, report.l_t, report.l_c, config, state_.iteration);

  const ToyModel& student = state_.student;
  const size_t p = student.parameters().size();
  out.total.assign(p, 0.0);
  const double lambda_c = active ? config.lambda_c : 0.0;
  for (int b = 0; b < batch; ++b) {
    const RealGrid& xs = data_.source->features(source_ids[b]);
    const RealGrid& xt = data_.target->features(target_ids[b]);
    student.Backward(xs, student_source[b], &ls.grad_logits[b], nullptr,
                     out.total);
    RealGrid target_logit_grad = lt.grad_logits[b];
    for (double& g : target_logit_grad.mutable_data()) g *= config.lambda_t;
    RealGrid target_embed_grad;
    if (active) {
      target_embed_grad = grad_embedding[b];
      for (double& g : target_embed_grad.mutable_data()) g *= lambda_c;
    }
    student.Backward(xt, student_target[b], &target_logit_grad,
                     active ? &target_embed_grad : nullptr, out.total);
  }

  if (split_terms) {
    out.source.assign(p, 0.0);
    out.target.assign(p, 0.0);
    out.contrastive.assign(p, 0.0);
    for (int b = 0; b < batch; ++b) {
      const RealGrid& xs = data_.source->features(source_ids[b]);
      const RealGrid& xt = data_.target->features(target_ids[b]);
      student.Backward(xs, student_source[b], &ls.grad_logits[b], nullptr,
                       out.source);
      student.Backward(xt, student_target[b], &lt.grad_logits[b], nullptr,
                       out.target);
      if (active) {
        student.Backward(xt, student_target[b], nullptr, &grad_embedding[b],
                         out.contrastive);
      }
    }
  }
  return out;
}

void Trainer::PushBanks() {
  const PgpcConfig& config = state_.config.pgpc;
  if (!config.ContrastiveEnabled() || config.bank_push_per_class == 0) return;
  const int classes = state_.config.task.classes;
  const int dim = state_.config.model.embed_dim;
  const int k = config.bank_push_per_class;
  const size_t batch = cache_.pseudo.size();
  Rng& rng = state_.sample_rng;

  for (int c = 0; c < classes; ++c) {
    EmbeddingList positives(dim);
    if (config.positive == PositiveSource::kSource) {
      for (size_t b = 0; b < batch; ++b) {
        const LabelGrid& y = cache_.source_labels[b];
        for (int j = 0; j < y.pixels(); ++j) {
          if (y.at(j) == c) {
            positives.Add(cache_.teacher_source[b].vector(j),
                          {Domain::kSource, static_cast<int>(b), j});
          }
        }
      }
    } else {
      for (size_t b = 0; b < batch; ++b) {
        positives.Append(AnchorSet(cache_.teacher_target[b],
                                   cache_.pseudo[b].labels,
                                   cache_.pseudo[b].reliable_mask, c,
                                   static_cast<int>(b)));
      }
    }
    PushSample(positives, k, c, rng, &state_.banks.prototypes);

    if (config.use_source_negatives) {
      EmbeddingList pool(dim);
      for (size_t b = 0; b < batch; ++b) {
        pool.Append(SourceNegatives(cache_.teacher_source[b],
                                    cache_.source_labels[b], c,
                                    static_cast<int>(b)));
      }
      PushSample(pool, k, c, rng, &state_.banks.source_negatives);
    }
    if (config.use_target_negatives) {
      EmbeddingList pool(dim);
      for (size_t b = 0; b < batch; ++b) {
        pool.Append(TargetNegatives(cache_.teacher_target[b], cache_.order[b],
                                    c, config.rank_r, static_cast<int>(b)));
      }
      PushSample(pool, k, c, rng, &state_.banks.target_negatives);
    }
  }
}

LossReport Trainer::Step() {
  StepGradients grads = Compute(/*split_terms=*/false);
  const double lr = LearningRate(state_.iteration);
  std::vector<double>& theta = state_.student.mutable_parameters();
  Axpy(-lr, grads.total, theta);

  double alpha = state_.config.pgpc.alpha;
  if (state_.config.pgpc.ema_ramp) {
    alpha = std::min(alpha, 1.0 - 1.0 / static_cast<double>(state_.iteration + 2));
  }
  EmaUpdate(state_.teacher.mutable_parameters(), theta, alpha);

  PushBanks();
  cache_ = Cache{};
  ++state_.iteration;
  return grads.report;
}

StepGradients Trainer::ComputeStepGradients() {
  StepGradients grads = Compute(/*split_terms=*/true);
  cache_ = Cache{};
  return grads;
}

void Trainer::RunUntil(int64_t last,
                       const std::function<void(const LossReport&)>& on_step) {
  while (state_.iteration < last) {
    const LossReport report = Step();
    if (on_step) on_step(report);
  }
}

IouResult Trainer::Evaluate() const {
  if (!data_.test) ThrowInvalidArgument("trainer has no test split");
  return Evaluator::Evaluate(state_.student, *data_.test);
}

void Trainer::SaveCheckpoint(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) ThrowIoError("cannot open checkpoint '" + path + "' for writing");
  binary::WriteU32(out, kCheckpointMagic);
  binary::WriteU32(out, kCheckpointVersion);
  binary::WriteString(out, state_.config.ToText());
  binary::WriteU64(out, state_.seed);
  binary::WriteU64(out, static_cast<uint64_t>(state_.iteration));
  binary::WriteString(out, RngToString(state_.data_rng));
  binary::WriteString(out, RngToString(state_.sample_rng));
  const auto& s = state_.student.parameters();
  const auto& t = state_.teacher.parameters();
  binary::WriteF64Vector(out, std::vector<double>(s.begin(), s.end()));
  binary::WriteF64Vector(out, std::vector<double>(t.begin(), t.end()));
  state_.banks.prototypes.Write(out);
  state_.banks.source_negatives.Write(out);
  state_.banks.target_negatives.Write(out);
  if (!out) ThrowIoError("failed writing checkpoint '" + path + "'");
}

Trainer Trainer::LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowIoError("cannot open checkpoint '" + path + "'");
  if (binary::ReadU32(in) != kCheckpointMagic) {
    ThrowIoError("'" + path + "' is not a checkpoint");
  }
  if (binary::ReadU32(in) != kCheckpointVersion) {
    ThrowIoError("unsupported checkpoint version");
  }
  TrainState state;
  state.config = ExperimentConfig::FromText(binary::ReadString(in));
  state.config.Validate();
  state.seed = binary::ReadU64(in);
  state.iteration = static_cast<int64_t>(binary::ReadU64(in));
  state.data_rng = RngFromString(binary::ReadString(in));
  state.sample_rng = RngFromString(binary::ReadString(in));
  const ModelShape shape = ShapeFor(state.config);
  state.student = ToyModel(shape, binary::ReadF64Vector(in));
  state.teacher = ToyModel(shape, binary::ReadF64Vector(in));
  state.banks.prototypes = ClassMemoryBank::Read(in);
  state.banks.source_negatives = ClassMemoryBank::Read(in);
  state.banks.target_negatives = ClassMemoryBank::Read(in);
  SplitData data = MakeSplits(state.config, state.seed);
  return Trainer(std::move(state), std::move(data));
}

FitResult Fit(const ExperimentConfig& config, uint64_t seed) {
  return Fit(config, seed, MakeSplits(config, seed));
}

FitResult Fit(const ExperimentConfig& config, uint64_t seed, SplitData data) {
  Trainer trainer(config, seed, std::move(data));
  FitResult result;
  result.history.reserve(config.pgpc.total_iters);
  trainer.RunUntil(config.pgpc.total_iters, [&result](const LossReport& r) {
    result.history.push_back(r);
  });
  const auto params = trainer.state().student.parameters();
  result.parameters.assign(params.begin(), params.end());
  if (trainer.data().test) result.evaluation = trainer.Evaluate();
  return result;
}

}  // namespace pgpc
