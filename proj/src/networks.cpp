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

#include "inade/networks.hpp"

#include <algorithm>
#include <cmath>

#include <torch/torch.h>

#include "inade/error.hpp"

namespace inade {

namespace F = torch::nn::functional;

std::vector<std::int64_t> ModelConfig::channel_schedule() const {
  static constexpr std::int64_t kMultipliers[] = {16, 16, 16, 8, 4, 2, 1};
  std::vector<std::int64_t> out;
  for (auto m : kMultipliers) out.push_back(std::min(m * base_width, max_width));
  return out;
}

void ModelConfig::validate() const {
  auto check = [](bool ok, const std::string& what) { require(ok, ErrorCode::kConfigInvalid, what); };
  check(height > 0 && width > 0, "model resolution must be positive");
  const std::int64_t up = std::int64_t{1} << num_upsamples();
  check(height % up == 0 && width % up == 0,
        "resolution " + std::to_string(height) + "x" + std::to_string(width) + " must be divisible by " +
            std::to_string(up));
  const std::int64_t enc = std::int64_t{1} << encoder.depth;
  check(height % enc == 0 && width % enc == 0, "resolution must be divisible by 2^encoder.depth");
  check(num_classes >= 1, "num_classes must be positive");
  check(noise_channels >= 1 && latent_dim >= 1, "noise_channels and latent_dim must be positive");
  check(base_width >= 1 && max_width >= 1, "widths must be positive");
  check(!encoder.widths.empty() && encoder.depth >= 0 && encoder.kernel % 2 == 1, "invalid encoder config");
  for (auto w : encoder.widths) check(w >= 1, "encoder widths must be positive");
  check(disc_base_width >= 1 && disc_max_width >= 1, "discriminator widths must be positive");
  check(disc_layers >= 3, "disc_layers must be at least 3");
  check(num_discriminators >= 1, "num_discriminators must be positive");
  check(norm.eps > 0 && norm.momentum >= 0 && norm.momentum <= 1, "invalid batch-norm settings");
  const std::int64_t strided = std::int64_t{1} << (disc_layers - 2 + num_discriminators - 1);
  check(height >= strided && width >= strided, "resolution too small for the discriminator depth");
}

SNConv2dImpl::SNConv2dImpl(std::int64_t in_channels, std::int64_t out_channels, std::int64_t kernel,
                           std::int64_t stride, std::int64_t padding, bool bias_enabled, bool spectral_norm)
    : stride_(stride), padding_(padding), spectral_norm_(spectral_norm) {
  weight_orig = register_parameter("weight", torch::empty({out_channels, in_channels, kernel, kernel}));
  torch::NoGradGuard no_grad;
  torch::nn::init::kaiming_uniform_(weight_orig, std::sqrt(5.0));
  if (bias_enabled) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_channels * kernel * kernel));
    bias = register_parameter("bias", torch::empty({out_channels}).uniform_(-bound, bound));
  }
  if (spectral_norm_) {
    u = register_buffer("sn_u", F::normalize(torch::randn({out_channels}), F::NormalizeFuncOptions().dim(0)));
    v = register_buffer("sn_v",
                        F::normalize(torch::randn({in_channels * kernel * kernel}), F::NormalizeFuncOptions().dim(0)));
  }
}

torch::Tensor SNConv2dImpl::effective_weight() {
  if (!spectral_norm_) return weight_orig;
  auto mat = weight_orig.reshape({weight_orig.size(0), -1});
  if (is_training()) {
    torch::NoGradGuard no_grad;
    const auto opts = F::NormalizeFuncOptions().dim(0).eps(1e-12);
    v.copy_(F::normalize(mat.t().mv(u), opts));
    u.copy_(F::normalize(mat.mv(v), opts));
  }
  auto sigma = u.clone().dot(mat.mv(v.clone()));
  return weight_orig / sigma;
}

torch::Tensor SNConv2dImpl::forward(const torch::Tensor& x) {
  return torch::conv2d(x, effective_weight(), bias, stride_, padding_);
}

InadeResBlockImpl::InadeResBlockImpl(std::int64_t in_channels, std::int64_t out_channels, const ModelConfig& config,
                                     int first_layer_index)
    : learned_shortcut_(in_channels != out_channels), slope_(config.slope) {
  const auto middle = std::min(in_channels, out_channels);
  const auto sn = config.spectral_norm;
  const auto c0 = config.noise_channels;
  norm_0_ = register_module("norm_0", InadeNorm(in_channels, config.num_classes, c0, first_layer_index, config.norm));
  norm_1_ = register_module("norm_1", InadeNorm(middle, config.num_classes, c0, first_layer_index + 1, config.norm));
  conv_0_ = register_module("conv_0", SNConv2d(in_channels, middle, 3, 1, 1, true, sn));
  conv_1_ = register_module("conv_1", SNConv2d(middle, out_channels, 3, 1, 1, true, sn));
  if (learned_shortcut_) {
    norm_s_ = register_module("norm_s",
                              InadeNorm(in_channels, config.num_classes, c0, first_layer_index + 2, config.norm));
    conv_s_ = register_module("conv_s", SNConv2d(in_channels, out_channels, 1, 1, 0, false, sn));
  }
}

torch::Tensor InadeResBlockImpl::forward(const torch::Tensor& x, const Conditioning& cond) {
  auto shortcut = learned_shortcut_ ? conv_s_(norm_s_(x, cond)) : x;
  auto dx = conv_0_(torch::leaky_relu(norm_0_(x, cond), slope_));
  dx = conv_1_(torch::leaky_relu(norm_1_(dx, cond), slope_));
  return shortcut + dx;
}

std::vector<InadeNorm> InadeResBlockImpl::norms() const {
  std::vector<InadeNorm> out{norm_0_, norm_1_};
  if (learned_shortcut_) out.push_back(norm_s_);
  return out;
}

GeneratorImpl::GeneratorImpl(const ModelConfig& config) : config_(config) {
  config_.validate();
  const auto schedule = config_.channel_schedule();
  h0_ = config_.height >> config_.num_upsamples();
  w0_ = config_.width >> config_.num_upsamples();
  fc_ = register_module("fc", torch::nn::Linear(config_.latent_dim, schedule[0] * h0_ * w0_));
  int layer = 0;
  for (int i = 0; i < ModelConfig::kNumBlocks; ++i) {
    upsample_.push_back(!(i == 1 && config_.drops_second_upsample()));
    auto block = InadeResBlock(schedule[static_cast<std::size_t>(i)], schedule[static_cast<std::size_t>(i + 1)],
                               config_, layer);
    layer += static_cast<int>(block->norms().size());
    blocks_.push_back(register_module("block" + std::to_string(i), block));
  }
  conv_img_ = register_module("conv_img", SNConv2d(schedule.back(), 3, 3, 1, 1, true, config_.spectral_norm));
}

torch::Tensor GeneratorImpl::forward(const torch::Tensor& z, const Conditioning& cond) {
  require(z.dim() == 2 && z.size(1) == config_.latent_dim &&
              static_cast<std::size_t>(z.size(0)) == cond.batch_size(),
          ErrorCode::kShapeMismatch, "z must be [B, " + std::to_string(config_.latent_dim) + "]");
  for (std::size_t b = 0; b < cond.batch_size(); ++b) {
    require(cond.pair(b).height() == config_.height && cond.pair(b).width() == config_.width,
            ErrorCode::kShapeMismatch, "label pair resolution differs from the generator's");
    require(cond.pair(b).num_classes() == config_.num_classes, ErrorCode::kShapeMismatch,
            "label pair class count differs from the generator's");
    require(cond.bank(b).channels() == config_.noise_channels, ErrorCode::kShapeMismatch,
            "noise bank width differs from C^0");
  }
  auto x = fc_(z).reshape({z.size(0), -1, h0_, w0_});
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (upsample_[i]) x = torch::upsample_nearest2d(x, {x.size(2) * 2, x.size(3) * 2});
    x = blocks_[i](x, cond);
  }
  return torch::tanh(conv_img_(torch::leaky_relu(x, config_.slope)));
}

std::vector<InadeNorm> GeneratorImpl::inade_layers() const {
  std::vector<InadeNorm> out;
  for (const auto& b : blocks_)
    for (auto& n : b->norms()) out.push_back(n);
  return out;
}

PatchDiscriminatorImpl::PatchDiscriminatorImpl(std::int64_t in_channels, const ModelConfig& config)
    : slope_(config.slope) {
  const int strided = config.disc_layers - 2;
  std::int64_t channels = in_channels;
  for (int i = 0; i < config.disc_layers; ++i) {
    const bool last = i == config.disc_layers - 1;
    const std::int64_t out =
        last ? 1 : std::min(config.disc_base_width << std::min(i, 30), config.disc_max_width);
    const bool is_strided = i < strided;
    layers_.push_back(register_module("conv" + std::to_string(i),
                                      SNConv2d(channels, out, is_strided ? 4 : 3, is_strided ? 2 : 1, 1, true,
                                               config.spectral_norm)));
    channels = out;
  }
}

std::vector<torch::Tensor> PatchDiscriminatorImpl::forward(const torch::Tensor& x) {
  std::vector<torch::Tensor> features;
  auto h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i](h);
    if (i + 1 < layers_.size()) h = torch::leaky_relu(h, slope_);
    features.push_back(h);
  }
  return features;
}

MultiscaleDiscriminatorImpl::MultiscaleDiscriminatorImpl(const ModelConfig& config) : depth_(config.disc_layers) {
  for (int k = 0; k < config.num_discriminators; ++k)
    scales_.push_back(register_module("scale" + std::to_string(k),
                                      PatchDiscriminator(4 + config.num_classes, config)));
}

ScaleFeatures MultiscaleDiscriminatorImpl::forward(const torch::Tensor& input) {
  ScaleFeatures out;
  auto x = input;
  for (std::size_t k = 0; k < scales_.size(); ++k) {
    if (k > 0) x = F::avg_pool2d(x, F::AvgPool2dFuncOptions(2).stride(2));
    out.push_back(scales_[k](x));
  }
  return out;
}

torch::Tensor discriminator_input(const torch::Tensor& images, const std::vector<LabelPair>& pairs) {
  require(images.dim() == 4 && images.size(1) == 3 && static_cast<std::size_t>(images.size(0)) == pairs.size(),
          ErrorCode::kShapeMismatch, "discriminator expects [B, 3, H, W] images with one label pair each");
  std::vector<torch::Tensor> conds;
  for (const auto& p : pairs) {
    require(p.height() == images.size(2) && p.width() == images.size(3), ErrorCode::kShapeMismatch,
            "image size differs from its label pair");
    auto one_hot = to_one_hot(p.mask().grid(), p.num_classes()).planes.to(images.scalar_type());
    conds.push_back(torch::cat({one_hot, boundary_map(p.inst()).to(images.scalar_type()).unsqueeze(0)}, 0));
  }
  return torch::cat({images, torch::stack(conds)}, 1);
}

ScaleFeatures discriminator_forward(MultiscaleDiscriminator& d, const torch::Tensor& images,
                                    const std::vector<LabelPair>& pairs) {
  return d->forward(discriminator_input(images, pairs));
}

Models build_default_models(const ModelConfig& config) {
  config.validate();
  torch::manual_seed(config.init_seed);
  Models m;
  m.generator = Generator(config);
  m.discriminator = MultiscaleDiscriminator(config);
  m.encoder = RemappingEncoder(config.encoder);
  return m;
}

std::int64_t count_conv_parameters(const torch::nn::Module& module) {
  std::int64_t total = 0;
  for (const auto& m : module.modules()) {
    if (auto conv = std::dynamic_pointer_cast<SNConv2dImpl>(m)) {
      total += conv->weight_orig.numel();
      if (conv->bias.defined()) total += conv->bias.numel();
    }
  }
  return total;
}

ParameterCounts count_parameters(const Models& models) {
  auto count = [](const torch::nn::Module& m) {
    std::int64_t n = 0;
    for (const auto& p : m.parameters()) n += p.numel();
    return n;
  };
  ParameterCounts c;
  c.generator = count(*models.generator);
  c.generator_conv = count_conv_parameters(*models.generator);
  c.discriminator = count(*models.discriminator);
  c.encoder = count(*models.encoder);
  return c;
}

}  // namespace inade
