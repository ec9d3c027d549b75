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
#include <torch/nn/modules/linear.h>
#include <torch/nn/pimpl.h>
#include <torch/types.h>

#include "inade/inade_core.hpp"
#include "inade/label_maps.hpp"
#include "inade/noise_remapping.hpp"

namespace inade {

struct ModelConfig {
  std::int64_t height = 64;
  std::int64_t width = 64;
  int num_classes = 4;
  std::int64_t noise_channels = 64;   // C^0
  std::int64_t latent_dim = 256;      // Z
  std::int64_t base_width = 16;       // nf; block widths are 16nf .. nf
  std::int64_t max_width = 256;
  bool spectral_norm = true;
  double slope = 0.2;
  NormSettings norm;
  EncoderConfig encoder;
  std::int64_t disc_base_width = 64;
  int disc_layers = 5;                // E_D, features per scale including the logit map
  int num_discriminators = 2;
  std::int64_t disc_max_width = 512;
  std::uint64_t init_seed = 0;

  static constexpr int kNumBlocks = 6;

  /// True for 1:2 (H:W) layouts, which drop the second block's upsample.
  bool drops_second_upsample() const noexcept { return width == 2 * height; }
  int num_upsamples() const noexcept { return drops_second_upsample() ? kNumBlocks - 1 : kNumBlocks; }
  /// Channel widths: element 0 is the linear head, 1..6 the block outputs.
  std::vector<std::int64_t> channel_schedule() const;
  void validate() const;
};

/// Conv2d with optional spectral normalisation (one power iteration per
/// training forward; stored u, v are reused in evaluation mode).
class SNConv2dImpl : public torch::nn::Module {
 public:
  SNConv2dImpl(std::int64_t in_channels, std::int64_t out_channels, std::int64_t kernel, std::int64_t stride,
               std::int64_t padding, bool bias, bool spectral_norm);

  torch::Tensor forward(const torch::Tensor& x);
  torch::Tensor effective_weight();

  torch::Tensor weight_orig;
  torch::Tensor bias;
  torch::Tensor u;
  torch::Tensor v;

 private:
  std::int64_t stride_;
  std::int64_t padding_;
  bool spectral_norm_;
};
TORCH_MODULE(SNConv2d);

/// (INADE -> leaky -> conv) twice, with an (INADE -> 1x1 conv) shortcut when
/// the channel count changes. Spatial size is preserved.
class InadeResBlockImpl : public torch::nn::Module {
 public:
  InadeResBlockImpl(std::int64_t in_channels, std::int64_t out_channels, const ModelConfig& config,
                    int first_layer_index);

  torch::Tensor forward(const torch::Tensor& x, const Conditioning& cond);
  std::vector<InadeNorm> norms() const;
  bool learned_shortcut() const noexcept { return learned_shortcut_; }

 private:
  bool learned_shortcut_;
  double slope_;
  InadeNorm norm_0_{nullptr}, norm_1_{nullptr}, norm_s_{nullptr};
  SNConv2d conv_0_{nullptr}, conv_1_{nullptr}, conv_s_{nullptr};
};
TORCH_MODULE(InadeResBlock);

class GeneratorImpl : public torch::nn::Module {
 public:
  explicit GeneratorImpl(const ModelConfig& config);

  /// z [B, Z] -> image [B, 3, H, W] in [-1, 1].
  torch::Tensor forward(const torch::Tensor& z, const Conditioning& cond);

  std::vector<InadeNorm> inade_layers() const;
  const ModelConfig& config() const noexcept { return config_; }
  std::int64_t initial_height() const noexcept { return h0_; }
  std::int64_t initial_width() const noexcept { return w0_; }
  bool upsamples_before(int block) const { return upsample_.at(static_cast<std::size_t>(block)); }

 private:
  ModelConfig config_;
  std::int64_t h0_;
  std::int64_t w0_;
  std::vector<bool> upsample_;
  torch::nn::Linear fc_{nullptr};
  std::vector<InadeResBlock> blocks_;
  SNConv2d conv_img_{nullptr};
};
TORCH_MODULE(Generator);

/// Per-scale feature lists; the last entry of each list is the logit map.
using ScaleFeatures = std::vector<std::vector<torch::Tensor>>;

class PatchDiscriminatorImpl : public torch::nn::Module {
 public:
  PatchDiscriminatorImpl(std::int64_t in_channels, const ModelConfig& config);
  std::vector<torch::Tensor> forward(const torch::Tensor& x);

 private:
  double slope_;
  std::vector<SNConv2d> layers_;
};
TORCH_MODULE(PatchDiscriminator);

class MultiscaleDiscriminatorImpl : public torch::nn::Module {
 public:
  explicit MultiscaleDiscriminatorImpl(const ModelConfig& config);
  /// Scale k sees the input average-downsampled k times by 2.
  ScaleFeatures forward(const torch::Tensor& input);
  int depth() const noexcept { return depth_; }

 private:
  int depth_;
  std::vector<PatchDiscriminator> scales_;
};
TORCH_MODULE(MultiscaleDiscriminator);

/// concat(image, one-hot semantic mask, boundary map) -> [B, 4 + L^m, H, W].
torch::Tensor discriminator_input(const torch::Tensor& images, const std::vector<LabelPair>& pairs);
ScaleFeatures discriminator_forward(MultiscaleDiscriminator& d, const torch::Tensor& images,
                                    const std::vector<LabelPair>& pairs);

struct Models {
  Generator generator{nullptr};
  MultiscaleDiscriminator discriminator{nullptr};
  RemappingEncoder encoder{nullptr};
};

struct ParameterCounts {
  std::int64_t generator = 0;
  std::int64_t generator_conv = 0;
  std::int64_t discriminator = 0;
  std::int64_t encoder = 0;
};

/// Puts a module in evaluation mode for the guard's lifetime.
class EvalModeGuard {
 public:
  explicit EvalModeGuard(torch::nn::Module& module) : module_(module), was_training_(module.is_training()) {
    module_.eval();
  }
  ~EvalModeGuard() { module_.train(was_training_); }
  EvalModeGuard(const EvalModeGuard&) = delete;
  EvalModeGuard& operator=(const EvalModeGuard&) = delete;

 private:
  torch::nn::Module& module_;
  bool was_training_;
};

/// Builds the three networks with the global torch RNG seeded from config.init_seed.
Models build_default_models(const ModelConfig& config);
ParameterCounts count_parameters(const Models& models);
std::int64_t count_conv_parameters(const torch::nn::Module& module);

}  // namespace inade
