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
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/optim/adam.h>
#include <torch/types.h>

#include "inade/config.hpp"
#include "inade/data.hpp"
#include "inade/losses.hpp"
#include "inade/networks.hpp"
#include "inade/rng.hpp"

namespace inade {

struct LearningRates {
  double g = 0.0;
  double d = 0.0;
};

/// Base rates up to decay_start, then lr * (epochs - epoch) / (epochs - decay_start).
LearningRates lr_at_epoch(const TrainConfig& cfg, int epoch);

struct StepLosses {
  std::int64_t step = 0;  // 1-based index of the completed step
  int epoch = 0;
  double d_loss = 0.0;
  double g_gan = 0.0;
  double g_fm = 0.0;
  double g_perc = 0.0;
  double g_kl = 0.0;
  double g_total = 0.0;
  double lr_g = 0.0;
  double lr_d = 0.0;

  nlohmann::json to_json() const;
};

/// Single-threaded GAN trainer. The data order of epoch e is the permutation
/// drawn from Rng(seed).split(e); step noise comes from one persistent stream.
class Trainer {
 public:
  Trainer(TrainConfig cfg, std::shared_ptr<const Dataset> data);

  /// One D update followed by one G/encoder update on `batch` at the current rates.
  StepLosses train_step(const Batch& batch);
  /// Next batch in schedule order; applies the epoch's learning rates.
  StepLosses step();
  /// Runs up to `steps` steps (fewer if the schedule ends).
  std::vector<StepLosses> run(std::int64_t steps, const std::function<void(const StepLosses&)>& on_step = {});

  bool finished() const noexcept { return global_step_ >= total_steps(); }
  std::int64_t total_steps() const noexcept;
  std::int64_t batches_per_epoch() const noexcept;
  std::int64_t global_step() const noexcept { return global_step_; }
  int current_epoch() const noexcept;

  const TrainConfig& config() const noexcept { return cfg_; }
  Models& models() noexcept { return models_; }
  torch::optim::Adam& optimizer_g() noexcept { return *opt_g_; }
  torch::optim::Adam& optimizer_d() noexcept { return *opt_d_; }
  Rng& noise_rng() noexcept { return noise_rng_; }

  void save(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);

 private:
  void set_learning_rates(const LearningRates& lr);
  std::vector<std::size_t> epoch_order(int epoch) const;

  TrainConfig cfg_;
  std::shared_ptr<const Dataset> data_;
  Models models_;
  std::unique_ptr<torch::optim::Adam> opt_g_;
  std::unique_ptr<torch::optim::Adam> opt_d_;
  RandomConvPyramid extractor_;
  Rng noise_rng_;
  std::int64_t global_step_ = 0;
  LearningRates current_lr_;
};

/// Single-file checkpoint; see README for the byte layout.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointContents {
  nlohmann::json metadata;
  std::map<std::string, torch::Tensor> tensors;
};

void write_checkpoint(const std::filesystem::path& path, const CheckpointContents& contents);
CheckpointContents read_checkpoint(const std::filesystem::path& path);

/// Model weights and config from a checkpoint, without optimizer state.
struct LoadedModels {
  TrainConfig config;
  Models models;
};
LoadedModels load_models(const std::filesystem::path& path);

/// Copies named tensors of `module` from `tensors` (prefix + "/" + name).
void load_module_tensors(torch::nn::Module& module, const std::string& prefix,
                         const std::map<std::string, torch::Tensor>& tensors);

struct PriorNoise {
  NoiseBank bank;
  torch::Tensor z;  // [1, Z]
};

/// Rng(seed): bank first, then z.
PriorNoise prior_noise(const ModelConfig& cfg, const LabelPair& pair, std::uint64_t seed);

/// Evaluation-mode, gradient-free generation of one [3, H, W] image.
torch::Tensor generate_image(Generator& gen, const LabelPair& pair, const NoiseBank& bank, const torch::Tensor& z);

torch::Tensor sample_prior(Generator& gen, const LabelPair& pair, std::uint64_t seed);

/// Per-instance remapping parameters encoded from a reference image of the same layout.
PerturbationSet encode_perturbations(RemappingEncoder& enc, const LabelPair& pair, const Sample& reference);

/// Prior noise from `seed` whose rows in `guided` are remapped by `ps`.
NoiseBank mixed_bank(const NoiseBank& prior, const PerturbationSet& ps, std::span<const std::int32_t> guided);

torch::Tensor sample_reference(Generator& gen, RemappingEncoder& enc, const LabelPair& pair, const Sample& reference,
                               std::uint64_t seed);
torch::Tensor sample_mixed(Generator& gen, RemappingEncoder& enc, const LabelPair& pair, const Sample& reference,
                           std::span<const std::int32_t> guided, std::uint64_t seed);
torch::Tensor sample_mixed_with(Generator& gen, const LabelPair& pair, const PerturbationSet& ps,
                                std::span<const std::int32_t> guided, std::uint64_t seed);

/// Prior noise of base_seed with row `instance` redrawn from Rng(new_row_seed).
PriorNoise resampled_noise(const ModelConfig& cfg, const LabelPair& pair, std::uint64_t base_seed,
                           std::int32_t instance, std::uint64_t new_row_seed);
torch::Tensor resample_instance(Generator& gen, const LabelPair& pair, std::uint64_t base_seed, std::int32_t instance,
                                std::uint64_t new_row_seed);

}  // namespace inade
