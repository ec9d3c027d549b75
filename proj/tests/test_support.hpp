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
#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include <torch/torch.h>

#include <gtest/gtest.h>

#include "inade/error.hpp"
#include "inade/label_maps.hpp"
#include "inade/networks.hpp"

/// Expects `stmt` to throw inade::Error with the given code.
#define EXPECT_INADE_ERROR(stmt, expected)                                   \
  do {                                                                       \
    try {                                                                    \
      stmt;                                                                  \
      ADD_FAILURE() << "no error thrown, expected " << #expected;            \
    } catch (const ::inade::Error& e) {                                      \
      EXPECT_EQ(e.code(), ::inade::ErrorCode::expected) << e.what();         \
    }                                                                        \
  } while (0)

namespace inade::test {

using Rows = std::initializer_list<std::initializer_list<std::int32_t>>;

inline LabelPair make_pair(Rows mask, Rows inst, int num_classes) {
  const auto ig = LabelGrid::from_rows(inst);
  return validate_pair(SemanticMask(LabelGrid::from_rows(mask), num_classes), InstanceMap::from_grid(ig));
}

/// Vertical stripes: instance l covers columns [(l-1) W / L, l W / L), with the given classes.
inline LabelPair stripes(std::int64_t h, std::int64_t w, const std::vector<std::int32_t>& classes, int num_classes) {
  const auto n = static_cast<std::int64_t>(classes.size());
  LabelGrid mask(h, w), inst(h, w);
  for (std::int64_t r = 0; r < h; ++r)
    for (std::int64_t c = 0; c < w; ++c) {
      const auto l = static_cast<std::int32_t>(c * n / w) + 1;
      inst.at(r, c) = l;
      mask.at(r, c) = classes[static_cast<std::size_t>(l - 1)];
    }
  return validate_pair(SemanticMask(mask, num_classes), InstanceMap(inst, static_cast<int>(n)));
}

/// 64x64 generator small enough for unit tests.
inline ModelConfig tiny_model(int num_classes = 3) {
  ModelConfig c;
  c.num_classes = num_classes;
  c.noise_channels = 8;
  c.latent_dim = 16;
  c.base_width = 1;
  c.max_width = 8;
  c.disc_base_width = 8;
  c.disc_max_width = 16;
  c.disc_layers = 4;
  c.encoder.widths = {4, 8};
  c.encoder.depth = 2;
  return c;
}

inline double max_abs_diff(const torch::Tensor& a, const torch::Tensor& b) {
  return (a.to(torch::kFloat64) - b.to(torch::kFloat64)).abs().max().item<double>();
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("inade_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace inade::test
