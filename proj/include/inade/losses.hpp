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
#include <memory>
#include <vector>

#include <torch/types.h>

#include "inade/networks.hpp"

namespace inade {

struct LossWeights {
  double lambda_fm = 10.0;
  double lambda_perc = 10.0;
  double lambda_kl = 0.05;
  int fm_start = 3;    // first counted discriminator feature, 1-based
  int perc_start = 3;  // first counted extractor feature, 1-based

  void validate() const;
};

/// Frozen image -> feature-list map used by the perceptual loss.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::vector<torch::Tensor> features(const torch::Tensor& images) const = 0;
  virtual int depth() const = 0;
};

/// V_1(x) = x.
class IdentityExtractor final : public FeatureExtractor {
 public:
  std::vector<torch::Tensor> features(const torch::Tensor& images) const override { return {images}; }
  int depth() const override { return 1; }
};

/// Random-weight strided conv pyramid (3x3, stride 2, leaky ReLU per stage).
/// Weights are drawn once from `seed` and never trained.
class RandomConvPyramid final : public FeatureExtractor {
 public:
  explicit RandomConvPyramid(std::uint64_t seed = 7, std::vector<std::int64_t> widths = {16, 32, 64, 128},
                             std::int64_t in_channels = 3);
  std::vector<torch::Tensor> features(const torch::Tensor& images) const override;
  int depth() const override { return static_cast<int>(weights_.size()); }

 private:
  std::vector<torch::Tensor> weights_;
};

/// Last feature of every scale.
std::vector<torch::Tensor> logits_of(const ScaleFeatures& features);

torch::Tensor hinge_d_loss(const std::vector<torch::Tensor>& real_logits,
                           const std::vector<torch::Tensor>& fake_logits);
torch::Tensor hinge_g_loss(const std::vector<torch::Tensor>& fake_logits);

/// Layers fm_start..E_D (1-based); real features are detached.
torch::Tensor feature_matching_loss(const ScaleFeatures& real, const ScaleFeatures& fake, int fm_start);

torch::Tensor perceptual_loss(const FeatureExtractor& fx, const torch::Tensor& real, const torch::Tensor& fake,
                              int perc_start);

struct GeneratorLossParts {
  torch::Tensor gan;
  torch::Tensor feature_matching;
  torch::Tensor perceptual;
  torch::Tensor kl;
};

torch::Tensor total_generator_objective(const GeneratorLossParts& parts, const LossWeights& weights);

}  // namespace inade
