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
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include <torch/nn/module.h>
#include <torch/nn/pimpl.h>
#include <torch/types.h>

#include "inade/label_maps.hpp"
#include "inade/rng.hpp"

namespace inade {

/// Per-image Gaussian noise shared by every INADE layer of one forward pass.
/// Row l-1 belongs to instance l.
struct NoiseBank {
  torch::Tensor gamma;  // [L^p, C^0]
  torch::Tensor beta;   // [L^p, C^0]
  std::uint64_t seed = 0;
  bool remapped = false;

  std::int64_t num_instances() const { return gamma.size(0); }
  std::int64_t channels() const { return gamma.size(1); }
};

/// Draws a seed from `rng` and fills both matrices from it (gamma first).
NoiseBank sample_noise_bank(std::int64_t num_instances, std::int64_t channels, Rng& rng);
NoiseBank sample_noise_bank_from_seed(std::int64_t num_instances, std::int64_t channels, std::uint64_t seed);

/// Redraws the gamma and beta rows of the given 1-based instances, in order.
void redraw_rows(NoiseBank& bank, std::span<const std::int32_t> instances, Rng& rng);

/// Learnable bias-free maps C^0 -> C^i.
struct LayerTransform {
  torch::Tensor f_gamma;  // [C^0, C^i]
  torch::Tensor f_beta;
  int layer_index = 0;
};

/// Class-conditional affine parameters of the variational modulation model.
struct DistributionParams {
  torch::Tensor a_gamma;  // [L^m, C^i]
  torch::Tensor b_gamma;
  torch::Tensor a_beta;
  torch::Tensor b_beta;
  int layer_index = 0;
};

struct InstanceModulation {
  torch::Tensor gamma;  // [L^p, C^i]
  torch::Tensor beta;
};

struct ModulationField {
  torch::Tensor gamma;  // [C^i, H^i, W^i]
  torch::Tensor beta;
};

/// Row-wise product with the transform: n_hat[l] = n[l] * F.
InstanceModulation transform_noise(const LayerTransform& t, const NoiseBank& bank);

/// gamma[l] = a_gamma[g(l)] * n_hat_gamma[l] + b_gamma[g(l)], same for beta.
/// `instance_class` holds 1-based class labels (int64, length L^p).
InstanceModulation modulate_instances(const DistributionParams& d, const torch::Tensor& instance_class,
                                      const torch::Tensor& n_gamma, const torch::Tensor& n_beta);

/// Instance-guided sampling: out[:, x, y] = per_instance[inst[x, y] - 1].
torch::Tensor scatter_igs(const torch::Tensor& per_instance, const torch::Tensor& inst_resized);

struct NormSettings {
  double eps = 1e-5;
  double momentum = 0.1;
};

/// Parameter-free batch normalisation followed by dense modulation.
/// Training mode normalises with batch statistics and updates the running
/// buffers; evaluation mode uses the running buffers.
torch::Tensor inade_normalize(const torch::Tensor& x, const torch::Tensor& gamma_field,
                              const torch::Tensor& beta_field, torch::Tensor& running_mean,
                              torch::Tensor& running_var, bool training, const NormSettings& settings);

struct ModulationRecord {
  int layer_index = 0;
  std::size_t batch_index = 0;
  const NoiseBank* bank = nullptr;
  ModulationField field;
};
using ModulationObserver = std::function<void(const ModulationRecord&)>;

/// Conditioning of one batch: label pairs, one noise bank per element and a
/// cache of per-resolution instance maps. Banks are ragged (L^p per image).
class Conditioning {
 public:
  Conditioning(std::vector<LabelPair> pairs, std::vector<NoiseBank> banks);

  std::size_t batch_size() const noexcept { return pairs_.size(); }
  const LabelPair& pair(std::size_t b) const { return pairs_.at(b); }
  const NoiseBank& bank(std::size_t b) const { return banks_.at(b); }
  const std::vector<NoiseBank>& banks() const noexcept { return banks_; }

  /// int64 [H, W] instance map resized to the requested resolution.
  const torch::Tensor& instance_map(std::size_t b, std::int64_t height, std::int64_t width) const;
  /// int64 g table of element b.
  const torch::Tensor& instance_class(std::size_t b) const { return classes_.at(b); }

  void set_observer(ModulationObserver observer) { observer_ = std::move(observer); }
  const ModulationObserver& observer() const noexcept { return observer_; }

 private:
  std::vector<LabelPair> pairs_;
  std::vector<NoiseBank> banks_;
  std::vector<torch::Tensor> classes_;
  mutable std::map<std::tuple<std::size_t, std::int64_t, std::int64_t>, torch::Tensor> resized_;
  ModulationObserver observer_;
};

/// Dense modulation fields for every batch element at the resolution of `x`.
/// Returns [B, C, H, W] gamma and beta.
std::pair<torch::Tensor, torch::Tensor> modulation_fields(const Conditioning& cond, const DistributionParams& d,
                                                          const LayerTransform& t, std::int64_t height,
                                                          std::int64_t width);

/// resize -> transform -> modulate -> scatter -> normalise.
torch::Tensor inade_layer_forward(const torch::Tensor& x, const Conditioning& cond, const DistributionParams& d,
                                  const LayerTransform& t, torch::Tensor& running_mean, torch::Tensor& running_var,
                                  bool training, const NormSettings& settings);

/// Unit-norm columns after an orthogonal draw, so Std[n_hat_k] = 1 for standard-normal noise.
torch::Tensor init_layer_transform(std::int64_t noise_channels, std::int64_t channels);

class InadeNormImpl : public torch::nn::Module {
 public:
  InadeNormImpl(std::int64_t channels, int num_classes, std::int64_t noise_channels, int layer_index,
                NormSettings settings = {});

  torch::Tensor forward(const torch::Tensor& x, const Conditioning& cond);

  DistributionParams distribution() const;
  LayerTransform transform() const;
  std::int64_t channels() const noexcept { return channels_; }
  int layer_index() const noexcept { return layer_index_; }

  torch::Tensor a_gamma, b_gamma, a_beta, b_beta;
  torch::Tensor f_gamma, f_beta;
  torch::Tensor running_mean, running_var;

 private:
  std::int64_t channels_;
  int layer_index_;
  NormSettings settings_;
};
TORCH_MODULE(InadeNorm);

}  // namespace inade
