// Copyright 2026 The INADE Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "inade/data.hpp"
#include "inade/losses.hpp"
#include "inade/networks.hpp"

namespace inade {

struct TrainConfig {
  double lr_g = 1e-4;
  double lr_d = 4e-4;
  double adam_beta1 = 0.0;
  double adam_beta2 = 0.9;
  int epochs = 200;
  int decay_start = 100;
  int batch_size = 8;
  std::uint64_t seed = 0;
  /// Stop after this many steps (0 = run all epochs).
  std::int64_t max_steps = 0;
  std::int64_t log_every = 50;
  std::int64_t checkpoint_every = 0;
  std::uint64_t extractor_seed = 7;
  LossWeights loss;
  ModelConfig model;

  void validate() const;
};

struct EvalConfig {
  int groups = 10;
  int pairs = 10;
  int resamples = 3;
  int num_images = 20;
  int fid_images = 200;
  std::uint64_t seed = 0;
  std::uint64_t embedder_seed = 11;

  void validate() const;
};

/// Everything a command can be configured with.
struct RunConfig {
  ShapesConfig data;
  TrainConfig train;
  EvalConfig eval;

  void validate() const;
};

nlohmann::json to_json(const ShapesConfig& c);
nlohmann::json to_json(const ModelConfig& c);
nlohmann::json to_json(const LossWeights& c);
nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const EvalConfig& c);
nlohmann::json to_json(const RunConfig& c);

/// Strict readers: keys absent from `j` keep their current value, unknown keys
/// and wrongly typed values raise ConfigInvalid.
void merge_json(const nlohmann::json& j, ShapesConfig& c);
void merge_json(const nlohmann::json& j, ModelConfig& c);
void merge_json(const nlohmann::json& j, TrainConfig& c);
void merge_json(const nlohmann::json& j, EvalConfig& c);
void merge_json(const nlohmann::json& j, RunConfig& c);

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

/// Sets a dotted key ("train.lr_g") from a string; the value is parsed as JSON
/// when possible, else taken as a string.
void apply_override(RunConfig& c, const std::string& dotted_key, const std::string& value);

}  // namespace inade
