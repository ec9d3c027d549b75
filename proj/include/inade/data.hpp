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

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <torch/types.h>

#include "inade/inade_core.hpp"
#include "inade/label_maps.hpp"
#include "inade/rng.hpp"

namespace inade {

enum class ShapeKind { kDisk = 0, kSquare = 1, kTriangle = 2 };

/// Colour law of one class: hue ~ N(hue, hue_spread) (wrapped to [0, 1)), fixed S and V.
struct ClassStyle {
  double hue = 0.0;
  double hue_spread = 0.05;
  double saturation = 0.8;
  double value = 0.9;
};

/// Class 1 is the background; classes 2.. are disk, square, triangle in that order.
struct ShapesConfig {
  std::int64_t height = 64;
  std::int64_t width = 64;
  int num_classes = 4;
  int min_shapes = 2;
  int max_shapes = 4;
  /// Shape half-extent range as a fraction of min(H, W).
  double min_extent = 0.1;
  double max_extent = 0.25;
  std::int64_t min_visible = 16;
  int num_samples = 2000;
  std::uint64_t seed = 0;
  std::vector<ClassStyle> styles{{0.58, 0.03, 0.25, 0.35}, {0.0, 0.05, 0.8, 0.9}, {0.33, 0.05, 0.8, 0.9},
                                 {0.66, 0.05, 0.8, 0.9}};

  void validate() const;
};

struct Sample {
  std::string id;
  torch::Tensor image;  // float [3, H, W] in [-1, 1], on the 8-bit grid
  LabelPair pair;
  std::vector<double> instance_hue;  // drawn hue per instance (entry l-1)
};

struct Dataset {
  std::int64_t height = 0;
  std::int64_t width = 0;
  int num_classes = 0;
  std::vector<Sample> samples;
};

/// Sample i depends only on (cfg, i): its engine is seeded from Rng(cfg.seed).split(i).
Sample generate_shape_sample(const ShapesConfig& cfg, std::size_t index);
Dataset generate_shapes(const ShapesConfig& cfg);

/// HSV in [0, 1] -> RGB in [0, 1].
std::array<double, 3> hsv_to_rgb(double h, double s, double v);

struct Batch {
  torch::Tensor images;  // [B, 3, H, W]
  std::vector<LabelPair> pairs;

  std::size_t size() const noexcept { return pairs.size(); }
  /// One bank per element, drawn in batch order.
  std::vector<NoiseBank> sample_banks(std::int64_t noise_channels, Rng& rng) const;
};

Batch collate(std::span<const Sample> samples);
Batch collate(const Dataset& dataset, std::span<const std::size_t> indices);

/// Directory layout: manifest.json plus, per sample <id>, <id>_image.png (8-bit
/// RGB), <id>_mask.png and <id>_inst.png (16-bit grey), <id>_labels.json and
/// <id>_meta.json.
inline constexpr int kDatasetFormatVersion = 1;
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace inade
