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

#include "inade/inade_core.hpp"

#include <torch/torch.h>

#include "inade/error.hpp"

namespace inade {

NoiseBank sample_noise_bank(std::int64_t num_instances, std::int64_t channels, Rng& rng) {
  return sample_noise_bank_from_seed(num_instances, channels, rng.next_u64());
}

NoiseBank sample_noise_bank_from_seed(std::int64_t num_instances, std::int64_t channels, std::uint64_t seed) {
  require(num_instances >= 1 && channels >= 1, ErrorCode::kShapeMismatch, "noise bank needs L^p >= 1 and C^0 >= 1");
  Rng rng(seed);
  NoiseBank bank;
  bank.gamma = rng.normal({num_instances, channels});
  bank.beta = rng.normal({num_instances, channels});
  bank.seed = seed;
  bank.remapped = false;
  return bank;
}

void redraw_rows(NoiseBank& bank, std::span<const std::int32_t> instances, Rng& rng) {
  torch::NoGradGuard no_grad;
  bank.gamma = bank.gamma.clone();
  bank.beta = bank.beta.clone();
  const auto c = bank.channels();
  for (auto l : instances) {
    require(l >= 1 && l <= bank.num_instances(), ErrorCode::kLabelOutOfRange,
            "instance " + std::to_string(l) + " has no noise row");
    bank.gamma[l - 1].copy_(rng.normal({c}, bank.gamma.scalar_type()));
    bank.beta[l - 1].copy_(rng.normal({c}, bank.beta.scalar_type()));
  }
}

InstanceModulation transform_noise(const LayerTransform& t, const NoiseBank& bank) {
  require(bank.gamma.dim() == 2 && bank.beta.sizes() == bank.gamma.sizes(), ErrorCode::kShapeMismatch,
          "noise bank matrices must share a 2-d shape");
  require(t.f_gamma.dim() == 2 && t.f_beta.sizes() == t.f_gamma.sizes(), ErrorCode::kShapeMismatch,
          "layer transforms must share a 2-d shape");
  require(bank.channels() == t.f_gamma.size(0), ErrorCode::kShapeMismatch,
          "noise has " + std::to_string(bank.channels()) + " channels, transform expects " +
              std::to_string(t.f_gamma.size(0)));
  return {bank.gamma.matmul(t.f_gamma), bank.beta.matmul(t.f_beta)};
}

InstanceModulation modulate_instances(const DistributionParams& d, const torch::Tensor& instance_class,
                                      const torch::Tensor& n_gamma, const torch::Tensor& n_beta) {
  const auto num_classes = d.a_gamma.size(0);
  const auto channels = d.a_gamma.size(1);
  for (const auto* p : {&d.b_gamma, &d.a_beta, &d.b_beta})
    require(p->sizes() == d.a_gamma.sizes(), ErrorCode::kShapeMismatch, "distribution parameters differ in shape");
  require(n_gamma.dim() == 2 && n_gamma.size(1) == channels && n_beta.sizes() == n_gamma.sizes(),
          ErrorCode::kShapeMismatch, "transformed noise does not match the layer's channel depth");
  require(instance_class.numel() == n_gamma.size(0), ErrorCode::kShapeMismatch,
          "g table length differs from the number of noise rows");
  if (instance_class.numel() > 0) {
    const auto lo = instance_class.min().item<std::int64_t>();
    const auto hi = instance_class.max().item<std::int64_t>();
    require(lo >= 1 && hi <= num_classes, ErrorCode::kClassOutOfRange,
            "class labels must lie in [1, " + std::to_string(num_classes) + "]");
  }
  const auto rows = instance_class.to(torch::kInt64) - 1;
  auto gamma = d.a_gamma.index_select(0, rows) * n_gamma + d.b_gamma.index_select(0, rows);
  auto beta = d.a_beta.index_select(0, rows) * n_beta + d.b_beta.index_select(0, rows);
  return {gamma, beta};
}

torch::Tensor scatter_igs(const torch::Tensor& per_instance, const torch::Tensor& inst_resized) {
  require(per_instance.dim() == 2 && inst_resized.dim() == 2, ErrorCode::kShapeMismatch,
          "scatter expects [L^p, C] rows and an [H, W] instance map");
  const auto flat = inst_resized.reshape({-1}).to(torch::kInt64);
  const auto lo = flat.min().item<std::int64_t>();
  const auto hi = flat.max().item<std::int64_t>();
  require(lo >= 1 && hi <= per_instance.size(0), ErrorCode::kLabelOutOfRange,
          "instance labels exceed the available modulation rows");
  return per_instance.index_select(0, flat - 1)
      .t()
      .reshape({per_instance.size(1), inst_resized.size(0), inst_resized.size(1)});
}

torch::Tensor inade_normalize(const torch::Tensor& x, const torch::Tensor& gamma_field,
                              const torch::Tensor& beta_field, torch::Tensor& running_mean,
                              torch::Tensor& running_var, bool training, const NormSettings& settings) {
  require(x.dim() == 4 && gamma_field.sizes() == x.sizes() && beta_field.sizes() == x.sizes(),
          ErrorCode::kShapeMismatch, "modulation fields must match the activation shape");
  require(running_mean.numel() == x.size(1) && running_var.numel() == x.size(1), ErrorCode::kShapeMismatch,
          "running statistics do not match the channel count");
  auto normalized = torch::batch_norm(x, {}, {}, running_mean, running_var, training, settings.momentum,
                                      settings.eps, /*cudnn_enabled=*/false);
  return gamma_field * normalized + beta_field;
}

Conditioning::Conditioning(std::vector<LabelPair> pairs, std::vector<NoiseBank> banks)
    : pairs_(std::move(pairs)), banks_(std::move(banks)) {
  require(pairs_.size() == banks_.size() && !pairs_.empty(), ErrorCode::kShapeMismatch,
          "need exactly one noise bank per label pair");
  for (std::size_t b = 0; b < pairs_.size(); ++b) {
    require(banks_[b].num_instances() == pairs_[b].num_instances(), ErrorCode::kShapeMismatch,
            "noise bank rows differ from the instance count of element " + std::to_string(b));
    classes_.push_back(pairs_[b].instance_class_tensor());
  }
}

const torch::Tensor& Conditioning::instance_map(std::size_t b, std::int64_t height, std::int64_t width) const {
  const auto key = std::make_tuple(b, height, width);
  auto it = resized_.find(key);
  if (it == resized_.end())
    it = resized_.emplace(key, resize_nearest(pairs_.at(b).inst().grid(), height, width).to_tensor()).first;
  return it->second;
}

std::pair<torch::Tensor, torch::Tensor> modulation_fields(const Conditioning& cond, const DistributionParams& d,
                                                          const LayerTransform& t, std::int64_t height,
                                                          std::int64_t width) {
  std::vector<torch::Tensor> gammas;
  std::vector<torch::Tensor> betas;
  gammas.reserve(cond.batch_size());
  betas.reserve(cond.batch_size());
  for (std::size_t b = 0; b < cond.batch_size(); ++b) {
    const auto n_hat = transform_noise(t, cond.bank(b));
    const auto mod = modulate_instances(d, cond.instance_class(b), n_hat.gamma, n_hat.beta);
    const auto& inst = cond.instance_map(b, height, width);
    gammas.push_back(scatter_igs(mod.gamma, inst));
    betas.push_back(scatter_igs(mod.beta, inst));
    if (cond.observer())
      cond.observer()(ModulationRecord{d.layer_index, b, &cond.bank(b), ModulationField{gammas.back(), betas.back()}});
  }
  return {torch::stack(gammas), torch::stack(betas)};
}

torch::Tensor inade_layer_forward(const torch::Tensor& x, const Conditioning& cond, const DistributionParams& d,
                                  const LayerTransform& t, torch::Tensor& running_mean, torch::Tensor& running_var,
                                  bool training, const NormSettings& settings) {
  require(x.dim() == 4 && static_cast<std::size_t>(x.size(0)) == cond.batch_size(), ErrorCode::kShapeMismatch,
          "activation batch differs from the conditioning batch");
  auto [gamma, beta] = modulation_fields(cond, d, t, x.size(2), x.size(3));
  return inade_normalize(x, gamma, beta, running_mean, running_var, training, settings);
}

torch::Tensor init_layer_transform(std::int64_t noise_channels, std::int64_t channels) {
  torch::NoGradGuard no_grad;
  auto f = torch::empty({noise_channels, channels});
  torch::nn::init::orthogonal_(f);
  return f / f.norm(2, {0}, /*keepdim=*/true);
}

InadeNormImpl::InadeNormImpl(std::int64_t channels, int num_classes, std::int64_t noise_channels, int layer_index,
                             NormSettings settings)
    : channels_(channels), layer_index_(layer_index), settings_(settings) {
  a_gamma = register_parameter("a_gamma", torch::ones({num_classes, channels}));
  b_gamma = register_parameter("b_gamma", torch::ones({num_classes, channels}));
  a_beta = register_parameter("a_beta", torch::ones({num_classes, channels}));
  b_beta = register_parameter("b_beta", torch::zeros({num_classes, channels}));
  f_gamma = register_parameter("f_gamma", init_layer_transform(noise_channels, channels));
  f_beta = register_parameter("f_beta", init_layer_transform(noise_channels, channels));
  running_mean = register_buffer("running_mean", torch::zeros({channels}));
  running_var = register_buffer("running_var", torch::ones({channels}));
}

DistributionParams InadeNormImpl::distribution() const {
  return DistributionParams{a_gamma, b_gamma, a_beta, b_beta, layer_index_};
}

LayerTransform InadeNormImpl::transform() const { return LayerTransform{f_gamma, f_beta, layer_index_}; }

torch::Tensor InadeNormImpl::forward(const torch::Tensor& x, const Conditioning& cond) {
  return inade_layer_forward(x, cond, distribution(), transform(), running_mean, running_var, is_training(),
                             settings_);
}

}  // namespace inade
