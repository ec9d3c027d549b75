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

#include "inade/losses.hpp"

#include <cmath>

#include <torch/torch.h>

#include "inade/error.hpp"
#include "inade/rng.hpp"

namespace inade {

void LossWeights::validate() const {
  require(lambda_fm >= 0 && lambda_perc >= 0 && lambda_kl >= 0, ErrorCode::kConfigInvalid,
          "loss weights must be non-negative");
  require(fm_start >= 1 && perc_start >= 1, ErrorCode::kConfigInvalid, "loss start indices must be at least 1");
}

RandomConvPyramid::RandomConvPyramid(std::uint64_t seed, std::vector<std::int64_t> widths, std::int64_t in_channels) {
  Rng rng(seed);
  std::int64_t c = in_channels;
  for (auto w : widths) {
    const double scale = std::sqrt(2.0 / static_cast<double>(c * 9));
    weights_.push_back(rng.normal({w, c, 3, 3}) * scale);
    c = w;
  }
}

std::vector<torch::Tensor> RandomConvPyramid::features(const torch::Tensor& images) const {
  std::vector<torch::Tensor> out;
  auto h = images;
  for (const auto& w : weights_) {
    h = torch::leaky_relu(torch::conv2d(h, w.to(h.scalar_type()), {}, 2, 1), 0.2);
    out.push_back(h);
  }
  return out;
}

std::vector<torch::Tensor> logits_of(const ScaleFeatures& features) {
  std::vector<torch::Tensor> out;
  for (const auto& scale : features) {
    require(!scale.empty(), ErrorCode::kShapeMismatch, "empty discriminator scale");
    out.push_back(scale.back());
  }
  return out;
}

torch::Tensor hinge_d_loss(const std::vector<torch::Tensor>& real_logits,
                           const std::vector<torch::Tensor>& fake_logits) {
  require(!real_logits.empty() && real_logits.size() == fake_logits.size(), ErrorCode::kShapeMismatch,
          "hinge loss needs the same number of real and fake scales");
  torch::Tensor total;
  for (std::size_t k = 0; k < real_logits.size(); ++k) {
    require(real_logits[k].sizes() == fake_logits[k].sizes(), ErrorCode::kShapeMismatch,
            "real and fake patch maps differ in shape");
    auto term = torch::relu(1.0 - real_logits[k]).mean() + torch::relu(1.0 + fake_logits[k]).mean();
    total = total.defined() ? total + term : term;
  }
  return total / static_cast<double>(real_logits.size());
}

torch::Tensor hinge_g_loss(const std::vector<torch::Tensor>& fake_logits) {
  require(!fake_logits.empty(), ErrorCode::kShapeMismatch, "hinge loss needs at least one scale");
  torch::Tensor total;
  for (const auto& f : fake_logits) total = total.defined() ? total - f.mean() : -f.mean();
  return total / static_cast<double>(fake_logits.size());
}

torch::Tensor feature_matching_loss(const ScaleFeatures& real, const ScaleFeatures& fake, int fm_start) {
  require(!real.empty() && real.size() == fake.size(), ErrorCode::kShapeMismatch,
          "feature matching needs aligned scales");
  torch::Tensor total;
  for (std::size_t k = 0; k < real.size(); ++k) {
    const auto depth = static_cast<int>(real[k].size());
    require(static_cast<int>(fake[k].size()) == depth, ErrorCode::kShapeMismatch,
            "feature lists differ in length");
    require(fm_start >= 1 && fm_start <= depth, ErrorCode::kIndexOutOfRange,
            "fm_start " + std::to_string(fm_start) + " outside 1.." + std::to_string(depth));
    for (int i = fm_start - 1; i < depth; ++i) {
      auto term = (real[k][static_cast<std::size_t>(i)].detach() - fake[k][static_cast<std::size_t>(i)]).abs().mean();
      total = total.defined() ? total + term : term;
    }
  }
  return total / static_cast<double>(real.size());
}

torch::Tensor perceptual_loss(const FeatureExtractor& fx, const torch::Tensor& real, const torch::Tensor& fake,
                              int perc_start) {
  require(real.sizes() == fake.sizes(), ErrorCode::kShapeMismatch, "perceptual loss needs same-size images");
  require(perc_start >= 1 && perc_start <= fx.depth(), ErrorCode::kIndexOutOfRange,
          "perc_start " + std::to_string(perc_start) + " outside 1.." + std::to_string(fx.depth()));
  std::vector<torch::Tensor> vr;
  {
    torch::NoGradGuard no_grad;
    vr = fx.features(real);
  }
  const auto vf = fx.features(fake);
  torch::Tensor total;
  for (int i = perc_start - 1; i < fx.depth(); ++i) {
    auto term = (vr[static_cast<std::size_t>(i)] - vf[static_cast<std::size_t>(i)]).abs().mean();
    total = total.defined() ? total + term : term;
  }
  return total;
}

torch::Tensor total_generator_objective(const GeneratorLossParts& parts, const LossWeights& weights) {
  return parts.gan + weights.lambda_fm * parts.feature_matching + weights.lambda_perc * parts.perceptual +
         weights.lambda_kl * parts.kl;
}

}  // namespace inade
