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

#include "inade/noise_remapping.hpp"

#include <cmath>

#include <torch/torch.h>

#include "inade/error.hpp"

namespace inade {

namespace F = torch::nn::functional;
using torch::indexing::None;
using torch::indexing::Slice;

torch::Tensor instance_partial_conv(const torch::Tensor& x, const torch::Tensor& inst, const torch::Tensor& weight,
                                    const torch::Tensor& bias) {
  require(x.dim() == 4 && inst.dim() == 3 && weight.dim() == 4, ErrorCode::kShapeMismatch,
          "partial conv expects x [B,C,H,W], inst [B,H,W], weight [O,C,kh,kw]");
  require(inst.size(0) == x.size(0) && inst.size(1) == x.size(2) && inst.size(2) == x.size(3),
          ErrorCode::kShapeMismatch, "instance map does not match the activation");
  require(weight.size(1) == x.size(1), ErrorCode::kShapeMismatch, "weight input channels differ from x");
  const auto kh = weight.size(2);
  const auto kw = weight.size(3);
  require(kh % 2 == 1 && kw % 2 == 1, ErrorCode::kShapeMismatch, "partial conv kernels must be odd");
  const auto batch = x.size(0);
  const auto cin = x.size(1);
  const auto h = x.size(2);
  const auto w = x.size(3);
  const auto window = kh * kw;
  const auto cout = weight.size(0);
  const auto num_labels = inst.max().item<std::int64_t>();
  require(inst.min().item<std::int64_t>() >= 1, ErrorCode::kLabelOutOfRange, "instance labels must be >= 1");

  // mask(q, q+k) = sum_l [inst(q) = l][inst(q+k) = l], so the masked sum at q
  // equals a plain convolution of x restricted to instance inst(q).
  torch::Tensor one_hot, centre, valid;
  {
    torch::NoGradGuard no_grad;
    auto labels = torch::arange(1, num_labels + 1, inst.options()).view({num_labels, 1, 1, 1});
    one_hot = inst.unsqueeze(0).eq(labels).to(x.scalar_type());  // [L, B, H, W]
    centre = (inst - 1).unsqueeze(0).unsqueeze(2);               // [1, B, 1, H, W]
    auto counts = torch::conv2d(one_hot.reshape({num_labels * batch, 1, h, w}),
                                torch::ones({1, 1, kh, kw}, x.options()), {}, 1, {kh / 2, kw / 2});
    valid = counts.reshape({num_labels, batch, 1, h, w}).gather(0, centre).squeeze(0);  // >= 1
  }
  auto per_label = (x.unsqueeze(0) * one_hot.unsqueeze(2)).reshape({num_labels * batch, cin, h, w});
  auto y = torch::conv2d(per_label, weight, {}, 1, {kh / 2, kw / 2}).reshape({num_labels, batch, cout, h, w});
  auto out = y.gather(0, centre.expand({1, batch, cout, h, w})).squeeze(0);
  out = out * (static_cast<double>(window) / valid);
  if (bias.defined()) out = out + bias.view({1, -1, 1, 1});
  return out;
}

std::pair<torch::Tensor, torch::Tensor> masked_downsample(const torch::Tensor& x, const torch::Tensor& inst) {
  require(x.dim() == 4 && inst.dim() == 3 && inst.size(1) == x.size(2) && inst.size(2) == x.size(3),
          ErrorCode::kShapeMismatch, "masked downsample expects x [B,C,H,W] with inst [B,H,W]");
  require(x.size(2) % 2 == 0 && x.size(3) % 2 == 0, ErrorCode::kShapeMismatch,
          "masked downsample needs even spatial dimensions");
  const auto b = x.size(0);
  const auto c = x.size(1);
  const auto h = x.size(2) / 2;
  const auto w = x.size(3) / 2;
  auto coarse = inst.index({Slice(), Slice(1, None, 2), Slice(1, None, 2)}).contiguous();
  auto mask = inst.reshape({b, h, 2, w, 2}).eq(coarse.reshape({b, h, 1, w, 1})).to(x.scalar_type());
  auto sums = (x.reshape({b, c, h, 2, w, 2}) * mask.unsqueeze(1)).sum({3, 5});
  auto counts = mask.sum({2, 4}).unsqueeze(1);
  return {sums / counts, coarse};
}

torch::Tensor masked_upsample(const torch::Tensor& x, const torch::Tensor& coarse_inst,
                              const torch::Tensor& fine_inst) {
  require(x.dim() == 4 && coarse_inst.dim() == 3 && fine_inst.dim() == 3, ErrorCode::kShapeMismatch,
          "masked upsample expects x [B,C,h,w] and instance maps [B,h,w], [B,2h,2w]");
  require(coarse_inst.size(1) == x.size(2) && coarse_inst.size(2) == x.size(3) &&
              fine_inst.size(1) == 2 * x.size(2) && fine_inst.size(2) == 2 * x.size(3),
          ErrorCode::kShapeMismatch, "instance maps do not match a 2x upsample of x");
  auto up = x.repeat_interleave(2, 2).repeat_interleave(2, 3);
  auto up_inst = coarse_inst.repeat_interleave(2, 1).repeat_interleave(2, 2);
  return up * up_inst.eq(fine_inst).unsqueeze(1).to(x.scalar_type());
}

InstancePartialConvImpl::InstancePartialConvImpl(std::int64_t in_channels, std::int64_t out_channels,
                                                 std::int64_t kernel) {
  weight = register_parameter("weight", torch::empty({out_channels, in_channels, kernel, kernel}));
  bias = register_parameter("bias", torch::empty({out_channels}));
  torch::NoGradGuard no_grad;
  torch::nn::init::kaiming_uniform_(weight, std::sqrt(5.0));
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_channels * kernel * kernel));
  bias.uniform_(-bound, bound);
}

torch::Tensor InstancePartialConvImpl::forward(const torch::Tensor& x, const torch::Tensor& inst) {
  return instance_partial_conv(x, inst, weight, bias);
}

PerturbationSet PerturbationSet::identity(std::int64_t num_instances, torch::Dtype dtype) {
  auto zeros = [&] { return torch::zeros({num_instances}, dtype); };
  return PerturbationSet{zeros(), zeros(), zeros(), zeros()};
}

PerturbationSet PerturbationSet::from_scale_shift(const torch::Tensor& a_gamma, const torch::Tensor& b_gamma,
                                                  const torch::Tensor& a_beta, const torch::Tensor& b_beta) {
  return PerturbationSet{2.0 * a_gamma.log(), b_gamma, 2.0 * a_beta.log(), b_beta};
}

RemappingEncoderImpl::RemappingEncoderImpl(EncoderConfig config) : config_(std::move(config)) {
  require(!config_.widths.empty() && config_.depth >= 0 && config_.kernel % 2 == 1, ErrorCode::kConfigInvalid,
          "encoder needs widths, depth >= 0 and an odd kernel");
  const auto k = config_.kernel;
  in_conv_ = register_module("in_conv", InstancePartialConv(config_.in_channels, width_at(0), k));
  for (int i = 1; i <= config_.depth; ++i)
    down_.push_back(register_module("down" + std::to_string(i), InstancePartialConv(width_at(i - 1), width_at(i), k)));
  for (int i = config_.depth; i >= 1; --i)
    up_.push_back(register_module("up" + std::to_string(i),
                                  InstancePartialConv(width_at(i) + width_at(i - 1), width_at(i - 1), k)));
  const char* names[] = {"head_s_gamma", "head_b_gamma", "head_s_beta", "head_b_beta"};
  torch::NoGradGuard no_grad;
  for (const char* name : names) {
    auto head = register_module(name, InstancePartialConv(width_at(0), 1, k));
    // Start close to the identity remapping (s = 0, b = 0).
    head->weight.mul_(0.1);
    head->bias.zero_();
    heads_.push_back(head);
  }
}

std::int64_t RemappingEncoderImpl::width_at(int level) const {
  const auto n = static_cast<int>(config_.widths.size());
  return config_.widths[static_cast<std::size_t>(std::min(level, n - 1))];
}

PerturbationMaps RemappingEncoderImpl::forward(const torch::Tensor& reference, const torch::Tensor& inst) {
  require(reference.dim() == 4 && reference.size(1) == config_.in_channels, ErrorCode::kShapeMismatch,
          "reference must be [B, " + std::to_string(config_.in_channels) + ", H, W]");
  const std::int64_t factor = std::int64_t{1} << config_.depth;
  require(reference.size(2) % factor == 0 && reference.size(3) % factor == 0, ErrorCode::kShapeMismatch,
          "reference size must be divisible by 2^depth");
  const auto act = [this](const torch::Tensor& t) { return torch::leaky_relu(t, config_.slope); };

  std::vector<torch::Tensor> insts{inst};
  std::vector<torch::Tensor> skips{act(in_conv_(reference, inst))};
  torch::Tensor x = skips.back();
  for (int i = 1; i <= config_.depth; ++i) {
    auto [pooled, coarse] = masked_downsample(x, insts.back());
    insts.push_back(coarse);
    x = act(down_[static_cast<std::size_t>(i - 1)](pooled, coarse));
    skips.push_back(x);
  }
  for (int i = config_.depth; i >= 1; --i) {
    const auto& fine = insts[static_cast<std::size_t>(i - 1)];
    auto up = masked_upsample(x, insts[static_cast<std::size_t>(i)], fine);
    x = act(up_[static_cast<std::size_t>(config_.depth - i)](torch::cat({up, skips[static_cast<std::size_t>(i - 1)]}, 1),
                                                             fine));
  }
  // The four heads share one pass over the final features.
  std::vector<torch::Tensor> w, b;
  for (const auto& h : heads_) {
    w.push_back(h->weight);
    b.push_back(h->bias);
  }
  auto maps = instance_partial_conv(x, inst, torch::cat(w, 0), torch::cat(b, 0));
  return PerturbationMaps{maps.select(1, 0), maps.select(1, 1), maps.select(1, 2), maps.select(1, 3)};
}

torch::Tensor stack_instance_maps(const std::vector<LabelPair>& pairs) {
  std::vector<torch::Tensor> maps;
  maps.reserve(pairs.size());
  for (const auto& p : pairs) maps.push_back(p.inst().grid().to_tensor());
  return torch::stack(maps);
}

PerturbationMaps encode_reference(RemappingEncoder& encoder, const torch::Tensor& reference,
                                  const std::vector<LabelPair>& pairs) {
  require(reference.dim() == 4 && static_cast<std::size_t>(reference.size(0)) == pairs.size(),
          ErrorCode::kShapeMismatch, "one label pair per reference image is required");
  for (const auto& p : pairs)
    require(p.height() == reference.size(2) && p.width() == reference.size(3), ErrorCode::kShapeMismatch,
            "reference size differs from its label pair");
  return encoder->forward(reference, stack_instance_maps(pairs));
}

torch::Tensor instance_average_pool(const torch::Tensor& map, const InstanceMap& inst) {
  const auto& g = inst.grid();
  require(map.dim() == 2 && map.size(0) == g.height && map.size(1) == g.width, ErrorCode::kShapeMismatch,
          "map does not match the instance map");
  const auto idx = g.to_tensor().reshape({-1}) - 1;
  const auto n = inst.num_instances();
  auto sums = torch::zeros({n}, map.options()).index_add(0, idx, map.reshape({-1}));
  auto counts = torch::bincount(idx, {}, n).to(map.scalar_type());
  return sums / counts;
}

PerturbationSet build_perturbation_set(const PerturbationMaps& maps, std::int64_t b, const InstanceMap& inst) {
  return PerturbationSet{instance_average_pool(maps.s_gamma[b], inst), instance_average_pool(maps.b_gamma[b], inst),
                         instance_average_pool(maps.s_beta[b], inst), instance_average_pool(maps.b_beta[b], inst)};
}

std::vector<PerturbationSet> build_perturbation_sets(const PerturbationMaps& maps,
                                                     const std::vector<LabelPair>& pairs) {
  std::vector<PerturbationSet> sets;
  sets.reserve(pairs.size());
  for (std::size_t b = 0; b < pairs.size(); ++b)
    sets.push_back(build_perturbation_set(maps, static_cast<std::int64_t>(b), pairs[b].inst()));
  return sets;
}

NoiseBank remap_noise(const NoiseBank& bank, const PerturbationSet& ps) {
  require(ps.num_instances() == bank.num_instances(), ErrorCode::kShapeMismatch,
          "perturbation set has " + std::to_string(ps.num_instances()) + " rows, bank has " +
              std::to_string(bank.num_instances()));
  NoiseBank out = bank;
  out.gamma = ps.scale_gamma().unsqueeze(1) * bank.gamma + ps.shift_gamma.unsqueeze(1);
  out.beta = ps.scale_beta().unsqueeze(1) * bank.beta + ps.shift_beta.unsqueeze(1);
  out.remapped = true;
  return out;
}

torch::Tensor kl_loss(const PerturbationSet& ps) {
  auto branch = [](const torch::Tensor& s, const torch::Tensor& b) {
    return (0.5 * (s.exp() + b.square() - 1.0 - s)).mean();
  };
  return 0.5 * (branch(ps.log_var_gamma, ps.shift_gamma) + branch(ps.log_var_beta, ps.shift_beta));
}

}  // namespace inade
