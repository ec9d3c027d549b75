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
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <torch/types.h>

#include "inade/inade_core.hpp"
#include "inade/label_maps.hpp"
#include "inade/losses.hpp"
#include "inade/networks.hpp"
#include "inade/rng.hpp"

namespace inade {

/// Distance between two [3, H, W] images, optionally restricted to a bool [H, W] region.
class PerceptualDistance {
 public:
  virtual ~PerceptualDistance() = default;
  virtual double distance(const torch::Tensor& a, const torch::Tensor& b,
                          const torch::Tensor& region = {}) const = 0;
};

/// Mean absolute difference over channels and region pixels. An empty region gives 0.
class MeanAbsoluteDistance final : public PerceptualDistance {
 public:
  double distance(const torch::Tensor& a, const torch::Tensor& b, const torch::Tensor& region = {}) const override;
};

/// Anything that turns (label pair, noise bank, z [1, Z]) into a [3, H, W] image.
class SynthesisModel {
 public:
  virtual ~SynthesisModel() = default;
  virtual torch::Tensor generate(const LabelPair& pair, const NoiseBank& bank, const torch::Tensor& z) = 0;
  virtual std::int64_t noise_channels() const = 0;
  virtual std::int64_t latent_dim() const = 0;
};

class GeneratorModel final : public SynthesisModel {
 public:
  explicit GeneratorModel(Generator generator) : generator_(std::move(generator)) {}
  torch::Tensor generate(const LabelPair& pair, const NoiseBank& bank, const torch::Tensor& z) override;
  std::int64_t noise_channels() const override { return generator_->config().noise_channels; }
  std::int64_t latent_dim() const override { return generator_->config().latent_dim; }

 private:
  Generator generator_;
};

/// Noise for one image: bank first, then z, both from `rng`.
std::pair<NoiseBank, torch::Tensor> draw_image_noise(const SynthesisModel& model, const LabelPair& pair, Rng& rng);

/// Group index pairs (a != b) drawn from the stream reserved for pairing.
std::vector<std::pair<int, int>> draw_group_pairs(int groups, int pairs, Rng& rng);

/// Group g draws image i's noise from root.split(g).split(i); the pairs come
/// from root.split(groups). Score = mean over pairs of mean image-wise distance.
double overall_diversity(SynthesisModel& model, const std::vector<LabelPair>& pairs, const PerceptualDistance& pd,
                         int groups, int num_pairs, const Rng& root);

/// One resampling target: bank rows to redraw and the region they own.
struct DiversityTarget {
  std::vector<std::int32_t> rows;
  torch::Tensor region;  // bool [H, W]
  std::int32_t label = 0;
};

std::vector<DiversityTarget> instance_targets(const LabelPair& pair);
std::vector<DiversityTarget> class_targets(const LabelPair& pair);

struct TargetScore {
  std::size_t image = 0;
  std::int32_t label = 0;
  double inside = 0.0;
  double outside = 0.0;
};

struct RegionDiversity {
  double inside = 0.0;   // mISD or mCSD
  double outside = 0.0;  // mOID or mOCD
  std::vector<TargetScore> targets;
};

/// Per image i (rng = root.split(i)): base bank, then z; for every target and
/// resample the target rows are redrawn from the same stream. Distances over
/// all unordered resample pairs; averaged over targets, then images.
RegionDiversity instance_diversity(SynthesisModel& model, const std::vector<LabelPair>& pairs,
                                   const PerceptualDistance& pd, int resamples, const Rng& root);
RegionDiversity class_diversity(SynthesisModel& model, const std::vector<LabelPair>& pairs,
                                const PerceptualDistance& pd, int resamples, const Rng& root);

struct SegmentationScore {
  double miou = 0.0;
  double accuracy = 0.0;
};

/// IoU averaged over the classes present in gt or pred.
SegmentationScore miou_accu(const SemanticMask& pred, const SemanticMask& gt);

/// Maps [N, 3, H, W] images to [N, D] embeddings.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual torch::Tensor embed(const torch::Tensor& images) const = 0;
};

/// Spatial means of every RandomConvPyramid stage, concatenated.
class PyramidEmbedder final : public Embedder {
 public:
  explicit PyramidEmbedder(std::uint64_t seed = 11) : pyramid_(seed) {}
  torch::Tensor embed(const torch::Tensor& images) const override;

 private:
  RandomConvPyramid pyramid_;
};

/// |mu_a - mu_b|^2 + tr(Sa + Sb - 2 (Sa^1/2 Sb Sa^1/2)^1/2), both covariances
/// jittered by eps * I.
double frechet_distance(const Eigen::VectorXd& mu_a, const Eigen::MatrixXd& sigma_a, const Eigen::VectorXd& mu_b,
                        const Eigen::MatrixXd& sigma_b, double eps = 1e-6);
/// Rows are samples; at least two per set.
double fid_from_embeddings(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double eps = 1e-6);
double fid(const Embedder& embedder, const torch::Tensor& set_a, const torch::Tensor& set_b);

struct DiversityReport {
  double lpips_overall = 0.0;
  double mcsd = 0.0;
  double mocd = 0.0;
  double misd = 0.0;
  double moid = 0.0;
  std::vector<TargetScore> per_instance;
  std::vector<TargetScore> per_class;
  int groups = 0;
  int pairs = 0;
  int resamples = 0;
  std::uint64_t seed = 0;

  std::string to_json() const;
};

DiversityReport diversity_report(SynthesisModel& model, const std::vector<LabelPair>& pairs,
                                 const PerceptualDistance& pd, int groups, int num_pairs, int resamples,
                                 std::uint64_t seed);

}  // namespace inade
