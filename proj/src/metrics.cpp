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

#include "inade/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "inade/error.hpp"

namespace inade {

double MeanAbsoluteDistance::distance(const torch::Tensor& a, const torch::Tensor& b,
                                      const torch::Tensor& region) const {
  require(a.sizes() == b.sizes() && a.dim() == 3, ErrorCode::kShapeMismatch, "distance needs two [C, H, W] images");
  auto diff = (a.to(torch::kFloat64) - b.to(torch::kFloat64)).abs();
  if (!region.defined()) return diff.mean().item<double>();
  require(region.dim() == 2 && region.size(0) == a.size(1) && region.size(1) == a.size(2),
          ErrorCode::kShapeMismatch, "region must be [H, W]");
  const auto count = region.sum().item<std::int64_t>();
  if (count == 0) return 0.0;
  const auto w = region.to(torch::kFloat64).unsqueeze(0);
  return (diff * w).sum().item<double>() / static_cast<double>(count * a.size(0));
}

torch::Tensor GeneratorModel::generate(const LabelPair& pair, const NoiseBank& bank, const torch::Tensor& z) {
  EvalModeGuard guard(*generator_);
  torch::NoGradGuard no_grad;
  Conditioning cond({pair}, {bank});
  return generator_->forward(z, cond)[0];
}

std::pair<NoiseBank, torch::Tensor> draw_image_noise(const SynthesisModel& model, const LabelPair& pair, Rng& rng) {
  auto bank = sample_noise_bank(pair.num_instances(), model.noise_channels(), rng);
  auto z = rng.normal({1, model.latent_dim()});
  return {std::move(bank), std::move(z)};
}

std::vector<std::pair<int, int>> draw_group_pairs(int groups, int pairs, Rng& rng) {
  require(groups >= 2, ErrorCode::kConfigInvalid, "diversity needs at least two groups");
  std::vector<std::pair<int, int>> out;
  for (int k = 0; k < pairs; ++k) {
    const int a = static_cast<int>(rng.uniform_int(0, groups - 1));
    int b = static_cast<int>(rng.uniform_int(0, groups - 2));
    if (b >= a) ++b;
    out.emplace_back(a, b);
  }
  return out;
}

double overall_diversity(SynthesisModel& model, const std::vector<LabelPair>& pairs, const PerceptualDistance& pd,
                         int groups, int num_pairs, const Rng& root) {
  require(groups >= 2, ErrorCode::kConfigInvalid, "diversity needs at least two groups");
  require(num_pairs >= 1, ErrorCode::kConfigInvalid, "diversity needs at least one pair");
  require(!pairs.empty(), ErrorCode::kNoInstances, "diversity needs at least one label pair");
  std::vector<std::vector<torch::Tensor>> images(static_cast<std::size_t>(groups));
  for (int g = 0; g < groups; ++g) {
    const Rng group_rng = root.split(static_cast<std::uint64_t>(g));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      Rng rng = group_rng.split(i);
      auto [bank, z] = draw_image_noise(model, pairs[i], rng);
      images[static_cast<std::size_t>(g)].push_back(model.generate(pairs[i], bank, z));
    }
  }
  Rng pair_rng = root.split(static_cast<std::uint64_t>(groups));
  double total = 0.0;
  for (auto [a, b] : draw_group_pairs(groups, num_pairs, pair_rng)) {
    double sum = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i)
      sum += pd.distance(images[static_cast<std::size_t>(a)][i], images[static_cast<std::size_t>(b)][i]);
    total += sum / static_cast<double>(pairs.size());
  }
  return total / num_pairs;
}

std::vector<DiversityTarget> instance_targets(const LabelPair& pair) {
  std::vector<DiversityTarget> out;
  for (std::int32_t l = 1; l <= pair.num_instances(); ++l)
    out.push_back({{l}, instance_region(pair.inst(), l), l});
  return out;
}

std::vector<DiversityTarget> class_targets(const LabelPair& pair) {
  std::vector<DiversityTarget> out;
  const auto mask = pair.mask().grid().to_tensor();
  for (std::int32_t c = 1; c <= pair.num_classes(); ++c) {
    DiversityTarget t;
    t.label = c;
    for (std::int32_t l = 1; l <= pair.num_instances(); ++l)
      if (pair.class_of(l) == c) t.rows.push_back(l);
    if (t.rows.empty()) continue;
    t.region = mask.eq(c);
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

template <typename TargetFn>
RegionDiversity region_diversity(SynthesisModel& model, const std::vector<LabelPair>& pairs,
                                 const PerceptualDistance& pd, int resamples, const Rng& root, TargetFn targets_of) {
  require(!pairs.empty(), ErrorCode::kNoInstances, "diversity needs at least one label pair");
  require(resamples >= 2, ErrorCode::kConfigInvalid, "diversity needs at least two resamples");
  RegionDiversity out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    Rng rng = root.split(i);
    const auto& pair = pairs[i];
    auto [bank, z] = draw_image_noise(model, pair, rng);
    const auto targets = targets_of(pair);
    require(!targets.empty(), ErrorCode::kNoInstances, "label pair has no instances");
    double image_inside = 0.0;
    double image_outside = 0.0;
    for (const auto& t : targets) {
      std::vector<torch::Tensor> images;
      for (int r = 0; r < resamples; ++r) {
        NoiseBank variant = bank;
        redraw_rows(variant, t.rows, rng);
        images.push_back(model.generate(pair, variant, z));
      }
      const auto outside_region = t.region.logical_not();
      double inside = 0.0;
      double outside = 0.0;
      int count = 0;
      for (int a = 0; a < resamples; ++a)
        for (int b = a + 1; b < resamples; ++b) {
          inside += pd.distance(images[static_cast<std::size_t>(a)], images[static_cast<std::size_t>(b)], t.region);
          outside +=
              pd.distance(images[static_cast<std::size_t>(a)], images[static_cast<std::size_t>(b)], outside_region);
          ++count;
        }
      inside /= count;
      outside /= count;
      out.targets.push_back({i, t.label, inside, outside});
      image_inside += inside;
      image_outside += outside;
    }
    out.inside += image_inside / static_cast<double>(targets.size());
    out.outside += image_outside / static_cast<double>(targets.size());
  }
  out.inside /= static_cast<double>(pairs.size());
  out.outside /= static_cast<double>(pairs.size());
  return out;
}

}  // namespace

RegionDiversity instance_diversity(SynthesisModel& model, const std::vector<LabelPair>& pairs,
                                   const PerceptualDistance& pd, int resamples, const Rng& root) {
  return region_diversity(model, pairs, pd, resamples, root, instance_targets);
}

RegionDiversity class_diversity(SynthesisModel& model, const std::vector<LabelPair>& pairs,
                                const PerceptualDistance& pd, int resamples, const Rng& root) {
  return region_diversity(model, pairs, pd, resamples, root, class_targets);
}

SegmentationScore miou_accu(const SemanticMask& pred, const SemanticMask& gt) {
  const auto& p = pred.grid();
  const auto& g = gt.grid();
  require(p.height == g.height && p.width == g.width, ErrorCode::kDimensionMismatch,
          "prediction and ground truth differ in size");
  require(pred.num_classes() == gt.num_classes(), ErrorCode::kDimensionMismatch,
          "prediction and ground truth use different class counts");
  const auto n = static_cast<std::size_t>(gt.num_classes()) + 1;
  std::vector<std::int64_t> inter(n, 0), in_pred(n, 0), in_gt(n, 0);
  std::int64_t equal = 0;
  for (std::size_t k = 0; k < g.values.size(); ++k) {
    const auto a = static_cast<std::size_t>(p.values[k]);
    const auto b = static_cast<std::size_t>(g.values[k]);
    ++in_pred[a];
    ++in_gt[b];
    if (a == b) {
      ++inter[a];
      ++equal;
    }
  }
  SegmentationScore s;
  int present = 0;
  for (std::size_t c = 1; c < n; ++c) {
    const auto uni = in_pred[c] + in_gt[c] - inter[c];
    if (uni == 0) continue;
    s.miou += static_cast<double>(inter[c]) / static_cast<double>(uni);
    ++present;
  }
  if (present > 0) s.miou /= present;
  if (!g.values.empty()) s.accuracy = static_cast<double>(equal) / static_cast<double>(g.values.size());
  return s;
}

torch::Tensor PyramidEmbedder::embed(const torch::Tensor& images) const {
  torch::NoGradGuard no_grad;
  std::vector<torch::Tensor> pooled;
  for (const auto& f : pyramid_.features(images.to(torch::kFloat32))) pooled.push_back(f.mean({2, 3}));
  return torch::cat(pooled, 1);
}

namespace {

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd tensor_to_matrix(const torch::Tensor& t) {
  auto c = t.to(torch::kFloat64).contiguous();
  Eigen::MatrixXd m(c.size(0), c.size(1));
  auto acc = c.accessor<double, 2>();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index k = 0; k < m.cols(); ++k) m(r, k) = acc[r][k];
  return m;
}

}  // namespace

double frechet_distance(const Eigen::VectorXd& mu_a, const Eigen::MatrixXd& sigma_a, const Eigen::VectorXd& mu_b,
                        const Eigen::MatrixXd& sigma_b, double eps) {
  const auto d = mu_a.size();
  require(mu_b.size() == d && sigma_a.rows() == d && sigma_a.cols() == d && sigma_b.rows() == d &&
              sigma_b.cols() == d,
          ErrorCode::kShapeMismatch, "Frechet distance operands differ in dimension");
  const Eigen::MatrixXd jitter = eps * Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd sa = 0.5 * (sigma_a + sigma_a.transpose()) + jitter;
  const Eigen::MatrixXd sb = 0.5 * (sigma_b + sigma_b.transpose()) + jitter;
  const Eigen::MatrixXd root = psd_sqrt(sa);
  const Eigen::MatrixXd inner = root * sb * root;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (inner + inner.transpose()), Eigen::EigenvaluesOnly);
  const double tr_cross = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return (mu_a - mu_b).squaredNorm() + sa.trace() + sb.trace() - 2.0 * tr_cross;
}

double fid_from_embeddings(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double eps) {
  require(a.rows() >= 2 && b.rows() >= 2, ErrorCode::kDegenerateSet, "FID needs at least two samples per set");
  require(a.cols() == b.cols(), ErrorCode::kShapeMismatch, "embedding widths differ");
  auto moments = [](const Eigen::MatrixXd& x) {
    Eigen::VectorXd mu = x.colwise().mean().transpose();
    Eigen::MatrixXd centred = x.rowwise() - mu.transpose();
    Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(x.rows() - 1);
    return std::make_pair(mu, cov);
  };
  auto [mu_a, sigma_a] = moments(a);
  auto [mu_b, sigma_b] = moments(b);
  return frechet_distance(mu_a, sigma_a, mu_b, sigma_b, eps);
}

double fid(const Embedder& embedder, const torch::Tensor& set_a, const torch::Tensor& set_b) {
  require(set_a.dim() == 4 && set_b.dim() == 4 && set_a.size(0) >= 2 && set_b.size(0) >= 2,
          ErrorCode::kDegenerateSet, "FID needs at least two [3, H, W] images per set");
  return fid_from_embeddings(tensor_to_matrix(embedder.embed(set_a)), tensor_to_matrix(embedder.embed(set_b)));
}

std::string DiversityReport::to_json() const {
  auto table = [](const std::vector<TargetScore>& rows) {
    auto arr = nlohmann::json::array();
    for (const auto& r : rows)
      arr.push_back({{"image", r.image}, {"label", r.label}, {"inside", r.inside}, {"outside", r.outside}});
    return arr;
  };
  nlohmann::json j{{"lpips_overall", lpips_overall},
                   {"mcsd", mcsd},
                   {"mocd", mocd},
                   {"misd", misd},
                   {"moid", moid},
                   {"groups", groups},
                   {"pairs", pairs},
                   {"resamples", resamples},
                   {"seed", seed},
                   {"per_instance", table(per_instance)},
                   {"per_class", table(per_class)}};
  return j.dump(2);
}

DiversityReport diversity_report(SynthesisModel& model, const std::vector<LabelPair>& pairs,
                                 const PerceptualDistance& pd, int groups, int num_pairs, int resamples,
                                 std::uint64_t seed) {
  const Rng root(seed);
  DiversityReport r;
  r.groups = groups;
  r.pairs = num_pairs;
  r.resamples = resamples;
  r.seed = seed;
  r.lpips_overall = overall_diversity(model, pairs, pd, groups, num_pairs, root.split(0));
  auto inst = instance_diversity(model, pairs, pd, resamples, root.split(1));
  auto cls = class_diversity(model, pairs, pd, resamples, root.split(1));
  r.misd = inst.inside;
  r.moid = inst.outside;
  r.mcsd = cls.inside;
  r.mocd = cls.outside;
  r.per_instance = std::move(inst.targets);
  r.per_class = std::move(cls.targets);
  return r;
}

}  // namespace inade
