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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "inade/config.hpp"
#include "inade/data.hpp"
#include "inade/metrics.hpp"
#include "inade/networks.hpp"

namespace inade {

/// Prior samples (seed = seed + i) for the first n dataset layouts, stacked [n, 3, H, W].
torch::Tensor prior_samples(Generator& gen, const Dataset& data, std::size_t n, std::uint64_t seed);

/// Real images of the first n samples, stacked.
torch::Tensor real_images(const Dataset& data, std::size_t n);

/// FID between prior samples and real images of the first n samples.
double fid_against_real(Generator& gen, const Dataset& data, std::size_t n, std::uint64_t seed,
                        const Embedder& embedder);

/// Selected metrics: any of "overall", "instance", "class", "fid".
nlohmann::json evaluation_report(Generator& gen, const Dataset& data, const EvalConfig& cfg,
                                 const std::vector<std::string>& metrics);

}  // namespace inade
