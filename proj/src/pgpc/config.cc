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

#include "pgpc/config.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <system_error>

#include "pgpc/status.h"

namespace pgpc {
namespace {

std::string Trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double ParseDouble(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    ThrowConfigError("key '" + key + "': expected a number, got '" + text + "'");
  }
  return v;
}

template <typename Int>
Int ParseInt(const std::string& key, const std::string& text) {
  Int v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    ThrowConfigError("key '" + key + "': expected an integer, got '" + text +
                     "'");
  }
  return v;
}

bool ParseBool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  ThrowConfigError("key '" + key + "': expected true/false, got '" + text + "'");
}

struct Field {
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define PGPC_DOUBLE(section, name)                                     \
  {#name, {[](ExperimentConfig& c, const std::string& v) {              \
             c.section.name = ParseDouble(#name, v);                    \
           },                                                           \
           [](const ExperimentConfig& c) {                              \
             return FormatDouble(c.section.name);                       \
           }}}
#define PGPC_INT(prefix, section, name)                                 \
  {prefix #name, {[](ExperimentConfig& c, const std::string& v) {       \
                    c.section.name =                                    \
                        ParseInt<decltype(c.section.name)>(#name, v);   \
                  },                                                    \
                  [](const ExperimentConfig& c) {                       \
                    return std::to_string(c.section.name);              \
                  }}}
#define PGPC_TASK_DOUBLE(name)                                          \
  {"task." #name, {[](ExperimentConfig& c, const std::string& v) {      \
                     c.task.name = ParseDouble("task." #name, v);       \
                   },                                                   \
                   [](const ExperimentConfig& c) {                      \
                     return FormatDouble(c.task.name);                  \
                   }}}

const std::map<std::string, Field>& FieldTable() {
  static const auto* table = new std::map<std::string, Field>{
      PGPC_DOUBLE(pgpc, tau),
      PGPC_DOUBLE(pgpc, lambda_t),
      PGPC_DOUBLE(pgpc, lambda_c),
      PGPC_DOUBLE(pgpc, eta),
      PGPC_DOUBLE(pgpc, kappa),
      PGPC_DOUBLE(pgpc, alpha),
      PGPC_DOUBLE(pgpc, learning_rate),
      PGPC_DOUBLE(pgpc, lr_warmup_fraction),
      PGPC_INT("", pgpc, rank_r),
      PGPC_INT("", pgpc, anchors_per_class),
      PGPC_INT("", pgpc, negatives_per_anchor),
      PGPC_INT("", pgpc, total_iters),
      PGPC_INT("", pgpc, bank_capacity),
      PGPC_INT("", pgpc, bank_push_per_class),
      PGPC_INT("", pgpc, batch_size),
      PGPC_INT("", pgpc, rng_seed),
      {"warmup_iters",
       {[](ExperimentConfig& c, const std::string& v) {
          if (v == "auto") {
            c.pgpc.warmup_iters.reset();
          } else {
            c.pgpc.warmup_iters = ParseInt<int64_t>("warmup_iters", v);
          }
        },
        [](const ExperimentConfig& c) {
          return c.pgpc.warmup_iters ? std::to_string(*c.pgpc.warmup_iters)
                                     : std::string("auto");
        }}},
      {"variant",
       {[](ExperimentConfig& c, const std::string& v) {
          ApplyVariant(v, &c.pgpc);
        },
        [](const ExperimentConfig& c) { return VariantName(c.pgpc); }}},
      {"selection",
       {[](ExperimentConfig& c, const std::string& v) {
          c.pgpc.selection = ParseSelectionStrategy(v);
        },
        [](const ExperimentConfig& c) { return ToString(c.pgpc.selection); }}},
      {"ce_reduction",
       {[](ExperimentConfig& c, const std::string& v) {
          if (v == "mean") {
            c.pgpc.ce_reduction = CeReduction::kMean;
          } else if (v == "sum") {
            c.pgpc.ce_reduction = CeReduction::kSum;
          } else {
            ThrowConfigError("ce_reduction must be 'mean' or 'sum'");
          }
        },
        [](const ExperimentConfig& c) {
          return std::string(c.pgpc.ce_reduction == CeReduction::kMean ? "mean"
                                                                       : "sum");
        }}},
      {"ema_ramp",
       {[](ExperimentConfig& c, const std::string& v) {
          c.pgpc.ema_ramp = ParseBool("ema_ramp", v);
        },
        [](const ExperimentConfig& c) {
          return std::string(c.pgpc.ema_ramp ? "true" : "false");
        }}},
      PGPC_INT("task.", task, classes),
      PGPC_INT("task.", task, features),
      PGPC_INT("task.", task, height),
      PGPC_INT("task.", task, width),
      PGPC_INT("task.", task, sites),
      PGPC_INT("task.", task, source_images),
      PGPC_INT("task.", task, target_images),
      PGPC_INT("task.", task, test_images),
      PGPC_TASK_DOUBLE(mean_radius),
      PGPC_TASK_DOUBLE(spread),
      PGPC_TASK_DOUBLE(rotation_deg),
      PGPC_TASK_DOUBLE(translation),
      PGPC_TASK_DOUBLE(noise_scale),
      {"task.require_all_classes",
       {[](ExperimentConfig& c, const std::string& v) {
          c.task.require_all_classes = ParseBool("task.require_all_classes", v);
        },
        [](const ExperimentConfig& c) {
          return std::string(c.task.require_all_classes ? "true" : "false");
        }}},
      PGPC_INT("model.", model, hidden),
      PGPC_INT("model.", model, embed_dim),
  };
  return *table;
}

#undef PGPC_DOUBLE
#undef PGPC_INT
#undef PGPC_TASK_DOUBLE

}  // namespace

void PgpcConfig::Validate(int num_classes) const {
  if (!(tau > 0.0)) ThrowConfigError("tau must be > 0");
  if (!(lambda_t >= 0.0)) ThrowConfigError("lambda_t must be >= 0");
  if (!(lambda_c >= 0.0)) ThrowConfigError("lambda_c must be >= 0");
  if (!(eta > 0.0 && eta <= 1.0)) ThrowConfigError("eta must be in (0, 1]");
  if (rank_r < 1 || rank_r > num_classes - 1) {
    ThrowConfigError("rank_r must be in [1, " + std::to_string(num_classes - 1) +
                     "]");
  }
  if (!(kappa > 0.0 && kappa < 1.0)) ThrowConfigError("kappa must be in (0, 1)");
  if (!(alpha > 0.0 && alpha < 1.0)) ThrowConfigError("alpha must be in (0, 1)");
  if (anchors_per_class < 1) ThrowConfigError("anchors_per_class must be >= 1");
  if (negatives_per_anchor < 1) {
    ThrowConfigError("negatives_per_anchor must be >= 1");
  }
  if (total_iters < 1) ThrowConfigError("total_iters must be >= 1");
  const int64_t warmup = EffectiveWarmup();
  if (warmup < 0 || warmup > total_iters) {
    ThrowConfigError("warmup_iters must be in [0, total_iters]");
  }
  if (bank_capacity < 1) ThrowConfigError("bank_capacity must be >= 1");
  if (bank_push_per_class < 0) {
    ThrowConfigError("bank_push_per_class must be >= 0");
  }
  if (lambda_c > 0.0 && !use_source_negatives && !use_target_negatives) {
    ThrowConfigError(
        "at least one of source/target negatives must be enabled when "
        "lambda_c > 0");
  }
  if (batch_size < 1) ThrowConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) ThrowConfigError("learning_rate must be > 0");
  if (!(lr_warmup_fraction >= 0.0 && lr_warmup_fraction <= 1.0)) {
    ThrowConfigError("lr_warmup_fraction must be in [0, 1]");
  }
}

void TaskConfig::Validate() const {
  if (classes < 2) ThrowConfigError("task.classes must be >= 2");
  if (features < 1) ThrowConfigError("task.features must be >= 1");
  if (height < 1 || width < 1) ThrowConfigError("task grid must be non-empty");
  if (sites < 1) ThrowConfigError("task.sites must be >= 1");
  if (require_all_classes && (sites < classes || height * width < classes)) {
    ThrowConfigError(
        "task.require_all_classes needs sites >= classes and enough pixels");
  }
  if (source_images < 1 || target_images < 1 || test_images < 1) {
    ThrowConfigError("every split needs at least one image");
  }
  if (!(spread > 0.0)) ThrowConfigError("task.spread must be > 0");
  if (!(noise_scale > 0.0)) ThrowConfigError("task.noise_scale must be > 0");
  if (!(mean_radius >= 0.0)) ThrowConfigError("task.mean_radius must be >= 0");
}

void ModelConfig::Validate() const {
  if (hidden < 1) ThrowConfigError("model.hidden must be >= 1");
  if (embed_dim < 2) ThrowConfigError("model.embed_dim must be >= 2");
}

void ExperimentConfig::Validate() const {
  task.Validate();
  model.Validate();
  pgpc.Validate(task.classes);
}

void ExperimentConfig::Set(const std::string& key, const std::string& value) {
  const auto& table = FieldTable();
  const auto it = table.find(key);
  if (it == table.end()) ThrowConfigError("unknown config key '" + key + "'");
  it->second.set(*this, value);
}

std::string ExperimentConfig::Get(const std::string& key) const {
  const auto& table = FieldTable();
  const auto it = table.find(key);
  if (it == table.end()) ThrowConfigError("unknown config key '" + key + "'");
  return it->second.get(*this);
}

std::string ExperimentConfig::ToText() const {
  std::string text;
  for (const auto& [key, field] : FieldTable()) {
    text += key + " = " + field.get(*this) + "\n";
  }
  return text;
}

uint64_t ExperimentConfig::Hash() const {
  uint64_t hash = 1469598103934665603ull;
  for (unsigned char ch : ToText()) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::vector<std::string> ExperimentConfig::Keys() {
  std::vector<std::string> keys;
  for (const auto& [key, field] : FieldTable()) keys.push_back(key);
  return keys;
}

ExperimentConfig ExperimentConfig::FromText(const std::string& text) {
  ExperimentConfig config;
  for (const auto& [key, value] : ParseKeyValueText(text)) config.Set(key, value);
  return config;
}

ExperimentConfig ExperimentConfig::FromFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) ThrowConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return FromText(buffer.str());
}

std::vector<std::pair<std::string, std::string>> ParseKeyValueText(
    const std::string& text) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::istringstream lines(text);
  std::string line;
  int number = 0;
  while (std::getline(lines, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      ThrowConfigError("config line " + std::to_string(number) +
                       ": expected 'key = value'");
    }
    std::string key = Trim(line.substr(0, eq));
    std::string value = Trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      ThrowConfigError("config line " + std::to_string(number) +
                       ": empty key or value");
    }
    pairs.emplace_back(std::move(key), std::move(value));
  }
  return pairs;
}

std::string ToString(SelectionStrategy strategy) {
  switch (strategy) {
    case SelectionStrategy::kGlobalEntropy:
      return "global-entropy";
    case SelectionStrategy::kGlobalConfidence:
      return "global-confidence";
    case SelectionStrategy::kClasswiseEntropy:
      return "classwise-entropy";
    case SelectionStrategy::kClasswiseConfidence:
      return "classwise-confidence";
  }
  return "global-entropy";
}

SelectionStrategy ParseSelectionStrategy(const std::string& text) {
  for (auto s : {SelectionStrategy::kGlobalEntropy,
                 SelectionStrategy::kGlobalConfidence,
                 SelectionStrategy::kClasswiseEntropy,
                 SelectionStrategy::kClasswiseConfidence}) {
    if (ToString(s) == text) return s;
  }
  ThrowConfigError("unknown selection strategy '" + text + "'");
}

void ApplyVariant(const std::string& text, PgpcConfig* config) {
  bool sp = false, tp = false, sn = false, tn = false;
  std::string token;
  std::string lowered = text;
  std::transform(lowered.begin(), lowered.end(), lowered.begin(), ::tolower);
  std::replace(lowered.begin(), lowered.end(), ',', '+');
  std::replace(lowered.begin(), lowered.end(), 'x', '+');
  std::istringstream parts(lowered);
  while (std::getline(parts, token, '+')) {
    token = Trim(token);
    if (token == "sp") {
      sp = true;
    } else if (token == "tp") {
      tp = true;
    } else if (token == "sn") {
      sn = true;
    } else if (token == "tn") {
      tn = true;
    } else if (!token.empty()) {
      ThrowConfigError("unknown variant component '" + token + "'");
    }
  }
  if (sp == tp) {
    ThrowConfigError("variant must name exactly one of sp/tp");
  }
  config->positive = sp ? PositiveSource::kSource : PositiveSource::kTarget;
  config->use_source_negatives = sn;
  config->use_target_negatives = tn;
}

std::string VariantName(const PgpcConfig& config) {
  std::string name =
      config.positive == PositiveSource::kSource ? "sp" : "tp";
  if (config.use_source_negatives) name += "+sn";
  if (config.use_target_negatives) name += "+tn";
  return name;
}

}  // namespace pgpc
