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
#include <vector>

#include <torch/types.h>

namespace inade {

/// Row-major integer grid. Labels are 1-based in storage.
struct LabelGrid {
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<std::int32_t> values;

  LabelGrid() = default;
  LabelGrid(std::int64_t h, std::int64_t w, std::int32_t fill = 0);
  static LabelGrid from_rows(std::initializer_list<std::initializer_list<std::int32_t>> rows);

  std::int64_t size() const noexcept { return height * width; }
  std::int32_t& at(std::int64_t r, std::int64_t c) { return values[static_cast<std::size_t>(r * width + c)]; }
  std::int32_t at(std::int64_t r, std::int64_t c) const { return values[static_cast<std::size_t>(r * width + c)]; }
  std::int32_t max_label() const;

  /// int64 tensor of shape [H, W].
  torch::Tensor to_tensor() const;

  friend bool operator==(const LabelGrid&, const LabelGrid&) = default;
};

class SemanticMask {
 public:
  SemanticMask() = default;
  SemanticMask(LabelGrid grid, int num_classes);

  const LabelGrid& grid() const noexcept { return grid_; }
  int num_classes() const noexcept { return num_classes_; }

 private:
  LabelGrid grid_;
  int num_classes_ = 0;
};

/// Instance labels are compacted: every label in [1, L^p] occupies a pixel.
class InstanceMap {
 public:
  InstanceMap() = default;
  InstanceMap(LabelGrid grid, int num_instances);
  /// Infers L^p from the largest label.
  static InstanceMap from_grid(LabelGrid grid);

  const LabelGrid& grid() const noexcept { return grid_; }
  int num_instances() const noexcept { return num_instances_; }

 private:
  LabelGrid grid_;
  int num_instances_ = 0;
};

/// Aligned semantic mask and instance map together with the instance -> class table.
class LabelPair {
 public:
  LabelPair() = default;

  const SemanticMask& mask() const noexcept { return mask_; }
  const InstanceMap& inst() const noexcept { return inst_; }
  /// g table; entry l-1 holds the class of instance l.
  const std::vector<std::int32_t>& instance_class() const noexcept { return instance_class_; }
  std::int32_t class_of(std::int32_t instance) const;

  int num_classes() const noexcept { return mask_.num_classes(); }
  int num_instances() const noexcept { return inst_.num_instances(); }
  std::int64_t height() const noexcept { return mask_.grid().height; }
  std::int64_t width() const noexcept { return mask_.grid().width; }

  /// int64 g table as a tensor of length L^p (1-based class labels).
  torch::Tensor instance_class_tensor() const;

  friend bool operator==(const LabelPair& a, const LabelPair& b);

 private:
  friend LabelPair validate_pair(const SemanticMask&, const InstanceMap&);
  friend LabelPair degenerate_instances(const SemanticMask&);

  SemanticMask mask_;
  InstanceMap inst_;
  std::vector<std::int32_t> instance_class_;
};

struct OneHotMask {
  torch::Tensor planes;  // bool [L, H, W]
};

LabelPair validate_pair(const SemanticMask& mask, const InstanceMap& inst);

/// Treats each used class as one instance when no instance annotation exists.
LabelPair degenerate_instances(const SemanticMask& mask);

OneHotMask to_one_hot(const LabelGrid& grid, int num_labels);

/// Nearest-neighbour resize with half-pixel centres: src = floor((i + 0.5) * H / H').
LabelGrid resize_nearest(const LabelGrid& grid, std::int64_t height, std::int64_t width);

/// bool [H, W], true where the instance map equals `label`.
torch::Tensor instance_region(const InstanceMap& inst, std::int32_t label);

/// float [H, W]; 1 where a 4-neighbour carries a different instance label.
torch::Tensor boundary_map(const InstanceMap& inst);

/// Label maps on disk: <stem>_mask.png and <stem>_inst.png (16-bit grey) plus
/// <stem>_labels.json with num_classes, num_instances and instance_class.
void save_label_pair(const LabelPair& pair, const std::filesystem::path& dir, const std::string& stem);
LabelPair load_label_pair(const std::filesystem::path& dir, const std::string& stem);

}  // namespace inade
