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

#include "inade/evaluation.hpp"

#include <algorithm>

#include <torch/torch.h>

#include "inade/engine.hpp"
#include "inade/error.hpp"

namespace inade {

using nlohmann::json;

torch::Tensor prior_samples(Generator& gen, const Dataset& data, std::size_t n, std::uint64_t seed) {
  require(n >= 1 && n <= data.samples.size(), ErrorCode::kIndexOutOfRange, "not enough samples in the dataset");
  std::vector<torch::Tensor> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_prior(gen, data.samples[i].pair, seed + i));
  return torch::stack(out);
}

torch::Tensor real_images(const Dataset& data, std::size_t n) {
  require(n >= 1 && n <= data.samples.size(), ErrorCode::kIndexOutOfRange, "not enough samples in the dataset");
  std::vector<torch::Tensor> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(data.samples[i].image);
  return torch::stack(out);
}

double fid_against_real(Generator& gen, const Dataset& data, std::size_t n, std::uint64_t seed,
                        const Embedder& embedder) {
  return fid(embedder, prior_samples(gen, data, n, seed), real_images(data, n));
}

json evaluation_report(Generator& gen, const Dataset& data, const EvalConfig& cfg,
                       const std::vector<std::string>& metrics) {
  cfg.validate();
  static const std::vector<std::string> known{"overall", "instance", "class", "fid"};
  for (const auto& m : metrics)
    require(std::find(known.begin(), known.end(), m) != known.end(), ErrorCode::kConfigInvalid,
            "unknown metric " + m);
  auto wants = [&](const char* m) { return std::find(metrics.begin(), metrics.end(), m) != metrics.end(); };
  const auto n = std::min(static_cast<std::size_t>(cfg.num_images), data.samples.size());
  std::vector<LabelPair> pairs;
  for (std::size_t i = 0; i < n; ++i) pairs.push_back(data.samples[i].pair);
  GeneratorModel model(gen);
  MeanAbsoluteDistance pd;
  const Rng root(cfg.seed);

  json report{{"format", "inade-report"}, {"version", 1}, {"num_images", n}, {"eval", to_json(cfg)}};
  auto table = [](const std::vector<TargetScore>& rows) {
    auto arr = json::array();
    for (const auto& r : rows)
      arr.push_back({{"image", r.image}, {"label", r.label}, {"inside", r.inside}, {"outside", r.outside}});
    return arr;
  };
  if (wants("overall")) report["lpips_overall"] = overall_diversity(model, pairs, pd, cfg.groups, cfg.pairs, root.split(0));
  if (wants("instance")) {
    auto r = instance_diversity(model, pairs, pd, cfg.resamples, root.split(1));
    report["misd"] = r.inside;
    report["moid"] = r.outside;
    report["per_instance"] = table(r.targets);
  }
  if (wants("class")) {
    auto r = class_diversity(model, pairs, pd, cfg.resamples, root.split(1));
    report["mcsd"] = r.inside;
    report["mocd"] = r.outside;
    report["per_class"] = table(r.targets);
  }
  if (wants("fid")) {
    const auto m = std::min(static_cast<std::size_t>(cfg.fid_images), data.samples.size());
    require(m >= 2, ErrorCode::kDegenerateSet, "FID needs at least two dataset samples");
    report["fid"] = fid_against_real(gen, data, m, cfg.seed, PyramidEmbedder(cfg.embedder_seed));
    report["fid_images"] = m;
  }
  return report;
}

}  // namespace inade
