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
#include <vector>

#include <torch/nn/module.h>
#include <torch/nn/pimpl.h>
#include <torch/types.h>

#include "inade/inade_core.hpp"
#include "inade/label_maps.hpp"

namespace inade {

/// Convolution restricted to the centre pixel's instance.
///
/// For an output pixel q of instance l only window pixels of l contribute, and
/// the sum is rescaled by (kh * kw) / valid(q), valid(q) being the number of
/// window pixels of l (at least one, q itself). Zero padding counts as a
/// foreign instance. `inst` is int64 [B, H, W]; kernel sizes must be odd.
torch::Tensor instance_partial_conv(const torch::Tensor& x, const torch::Tensor& inst, const torch::Tensor& weight,
                                    const torch::Tensor& bias);

/// 2x downsampling that averages, inside each 2x2 window, only the pixels of
/// the window centre's instance. The coarse instance map is the half-pixel
/// nearest downsample (pixel (2i+1, 2j+1)). Returns {x', inst'}.
std::pair<torch::Tensor, torch::Tensor> masked_downsample(const torch::Tensor& x, const torch::Tensor& inst);

/// 2x nearest upsampling gated by instance equality: a fine pixel keeps the
/// replicated coarse value only when both carry the same instance, else 0.
torch::Tensor masked_upsample(const torch::Tensor& x, const torch::Tensor& coarse_inst,
                              const torch::Tensor& fine_inst);

class InstancePartialConvImpl : public torch::nn::Module {
 public:
  InstancePartialConvImpl(std::int64_t in_channels, std::int64_t out_channels, std::int64_t kernel = 3);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& inst);

  torch::Tensor weight;
  torch::Tensor bias;
};
TORCH_MODULE(InstancePartialConv);

struct EncoderConfig {
  std::vector<std::int64_t> widths{32, 64, 128};
  int depth = 3;
  std::int64_t kernel = 3;
  double slope = 0.2;
  std::int64_t in_channels = 3;
};

/// Dense per-pixel perturbations; s_* are log-variances. Each [B, H, W].
struct PerturbationMaps {
  torch::Tensor s_gamma;
  torch::Tensor b_gamma;
  torch::Tensor s_beta;
  torch::Tensor b_beta;
};

/// Per-instance remapping parameters (length L^p). Scales are exp(s / 2).
struct PerturbationSet {
  torch::Tensor log_var_gamma;
  torch::Tensor shift_gamma;
  torch::Tensor log_var_beta;
  torch::Tensor shift_beta;

  torch::Tensor scale_gamma() const { return (0.5 * log_var_gamma).exp(); }
  torch::Tensor scale_beta() const { return (0.5 * log_var_beta).exp(); }
  std::int64_t num_instances() const { return shift_gamma.numel(); }

  static PerturbationSet identity(std::int64_t num_instances, torch::Dtype dtype = torch::kFloat32);
  static PerturbationSet from_scale_shift(const torch::Tensor& a_gamma, const torch::Tensor& b_gamma,
                                          const torch::Tensor& a_beta, const torch::Tensor& b_beta);
};

/// U-shaped encoder whose every spatial operator is instance-masked, so the
/// maps inside one instance depend only on reference pixels of that instance.
class RemappingEncoderImpl : public torch::nn::Module {
 public:
  explicit RemappingEncoderImpl(EncoderConfig config = {});

  /// reference [B, 3, H, W], inst int64 [B, H, W]; H and W divisible by 2^depth.
  PerturbationMaps forward(const torch::Tensor& reference, const torch::Tensor& inst);

  const EncoderConfig& config() const noexcept { return config_; }

 private:
  std::int64_t width_at(int level) const;

  EncoderConfig config_;
  std::vector<InstancePartialConv> down_;
  std::vector<InstancePartialConv> up_;
  InstancePartialConv in_conv_{nullptr};
  std::vector<InstancePartialConv> heads_;
};
TORCH_MODULE(RemappingEncoder);

/// Stacks the instance maps of a batch into int64 [B, H, W].
torch::Tensor stack_instance_maps(const std::vector<LabelPair>& pairs);

PerturbationMaps encode_reference(RemappingEncoder& encoder, const torch::Tensor& reference,
                                  const std::vector<LabelPair>& pairs);

/// out[l-1] = mean of map over the pixels of instance l. map is [H, W].
torch::Tensor instance_average_pool(const torch::Tensor& map, const InstanceMap& inst);

/// Pools element `b` of the maps per instance.
PerturbationSet build_perturbation_set(const PerturbationMaps& maps, std::int64_t b, const InstanceMap& inst);
std::vector<PerturbationSet> build_perturbation_sets(const PerturbationMaps& maps, const std::vector<LabelPair>& pairs);

/// n~[l] = a[l] * n[l] + b[l], scalar per row broadcast over C^0.
NoiseBank remap_noise(const NoiseBank& bank, const PerturbationSet& ps);

/// 0.5 * (mean_l KL_gamma + mean_l KL_beta), KL(N(b, a^2) || N(0, 1)) = 0.5 (a^2 + b^2 - 1 - ln a^2).
torch::Tensor kl_loss(const PerturbationSet& ps);

}  // namespace inade
