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

#include "inade/label_maps.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "inade/error.hpp"
#include "inade/image_io.hpp"

namespace inade {
namespace {

void check_positive_dims(const LabelGrid& grid) {
  require(grid.height > 0 && grid.width > 0, ErrorCode::kDimensionMismatch, "label grid must have positive dimensions");
  require(grid.values.size() == static_cast<std::size_t>(grid.size()), ErrorCode::kDimensionMismatch,
          "label grid storage does not match its dimensions");
}

void check_range(const LabelGrid& grid, int num_labels) {
  require(num_labels >= 1, ErrorCode::kLabelOutOfRange, "label count must be positive");
  for (auto v : grid.values)
    require(v >= 1 && v <= num_labels, ErrorCode::kLabelOutOfRange,
            "label " + std::to_string(v) + " outside [1, " + std::to_string(num_labels) + "]");
}

constexpr int kLabelFormatVersion = 1;

}  // namespace

LabelGrid::LabelGrid(std::int64_t h, std::int64_t w, std::int32_t fill)
    : height(h), width(w), values(static_cast<std::size_t>(std::max<std::int64_t>(h * w, 0)), fill) {}

LabelGrid LabelGrid::from_rows(std::initializer_list<std::initializer_list<std::int32_t>> rows) {
  LabelGrid g;
  g.height = static_cast<std::int64_t>(rows.size());
  g.width = rows.size() ? static_cast<std::int64_t>(rows.begin()->size()) : 0;
  for (const auto& row : rows) {
    require(static_cast<std::int64_t>(row.size()) == g.width, ErrorCode::kDimensionMismatch, "ragged rows");
    g.values.insert(g.values.end(), row.begin(), row.end());
  }
  return g;
}

std::int32_t LabelGrid::max_label() const {
  return values.empty() ? 0 : *std::max_element(values.begin(), values.end());
}

torch::Tensor LabelGrid::to_tensor() const {
  return torch::from_blob(const_cast<std::int32_t*>(values.data()), {height, width}, torch::kInt32)
      .to(torch::kInt64);
}

SemanticMask::SemanticMask(LabelGrid grid, int num_classes) : grid_(std::move(grid)), num_classes_(num_classes) {
  check_positive_dims(grid_);
  check_range(grid_, num_classes_);
}

InstanceMap::InstanceMap(LabelGrid grid, int num_instances) : grid_(std::move(grid)), num_instances_(num_instances) {
  check_positive_dims(grid_);
  check_range(grid_, num_instances_);
  std::vector<char> used(static_cast<std::size_t>(num_instances_) + 1, 0);
  for (auto v : grid_.values) used[static_cast<std::size_t>(v)] = 1;
  for (int l = 1; l <= num_instances_; ++l)
    require(used[static_cast<std::size_t>(l)], ErrorCode::kEmptyInstanceLabel,
            "instance label " + std::to_string(l) + " occupies no pixel");
}

InstanceMap InstanceMap::from_grid(LabelGrid grid) {
  const int n = grid.max_label();
  return InstanceMap(std::move(grid), n);
}

std::int32_t LabelPair::class_of(std::int32_t instance) const {
  require(instance >= 1 && instance <= num_instances(), ErrorCode::kLabelOutOfRange,
          "instance " + std::to_string(instance) + " outside [1, " + std::to_string(num_instances()) + "]");
  return instance_class_[static_cast<std::size_t>(instance - 1)];
}

torch::Tensor LabelPair::instance_class_tensor() const {
  return torch::from_blob(const_cast<std::int32_t*>(instance_class_.data()),
                          {static_cast<std::int64_t>(instance_class_.size())}, torch::kInt32)
      .to(torch::kInt64);
}

bool operator==(const LabelPair& a, const LabelPair& b) {
  return a.num_classes() == b.num_classes() && a.num_instances() == b.num_instances() &&
         a.mask().grid() == b.mask().grid() && a.inst().grid() == b.inst().grid() &&
         a.instance_class_ == b.instance_class_;
}

LabelPair validate_pair(const SemanticMask& mask, const InstanceMap& inst) {
  const auto& m = mask.grid();
  const auto& p = inst.grid();
  require(m.height == p.height && m.width == p.width, ErrorCode::kDimensionMismatch,
          "mask and instance map differ in size");
  std::vector<std::int32_t> g(static_cast<std::size_t>(inst.num_instances()), 0);
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    auto& cls = g[static_cast<std::size_t>(p.values[i] - 1)];
    if (cls == 0) {
      cls = m.values[i];
    } else if (cls != m.values[i]) {
      fail(ErrorCode::kInconsistentInstance, "instance " + std::to_string(p.values[i]) + " covers classes " +
                                                 std::to_string(cls) + " and " + std::to_string(m.values[i]));
    }
  }
  LabelPair pair;
  pair.mask_ = mask;
  pair.inst_ = inst;
  pair.instance_class_ = std::move(g);
  return pair;
}

LabelPair degenerate_instances(const SemanticMask& mask) {
  // Used classes become instances in increasing class order.
  std::vector<std::int32_t> rank(static_cast<std::size_t>(mask.num_classes()) + 1, 0);
  for (auto v : mask.grid().values) rank[static_cast<std::size_t>(v)] = 1;
  std::vector<std::int32_t> g;
  for (int c = 1; c <= mask.num_classes(); ++c) {
    if (rank[static_cast<std::size_t>(c)]) {
      g.push_back(c);
      rank[static_cast<std::size_t>(c)] = static_cast<std::int32_t>(g.size());
    }
  }
  LabelGrid inst_grid = mask.grid();
  for (auto& v : inst_grid.values) v = rank[static_cast<std::size_t>(v)];
  LabelPair pair;
  pair.mask_ = mask;
  pair.inst_ = InstanceMap(std::move(inst_grid), static_cast<int>(g.size()));
  pair.instance_class_ = std::move(g);
  return pair;
}

OneHotMask to_one_hot(const LabelGrid& grid, int num_labels) {
  check_range(grid, num_labels);
  auto labels = grid.to_tensor() - 1;
  auto planes = torch::arange(num_labels, torch::kInt64).view({num_labels, 1, 1}).eq(labels.unsqueeze(0));
  return OneHotMask{planes};
}

LabelGrid resize_nearest(const LabelGrid& grid, std::int64_t height, std::int64_t width) {
  require(height > 0 && width > 0, ErrorCode::kDimensionMismatch, "resize target must be positive");
  if (height == grid.height && width == grid.width) return grid;
  LabelGrid out(height, width);
  std::vector<std::int64_t> cols(static_cast<std::size_t>(width));
  for (std::int64_t c = 0; c < width; ++c)
    cols[static_cast<std::size_t>(c)] = std::min(grid.width - 1, ((2 * c + 1) * grid.width) / (2 * width));
  for (std::int64_t r = 0; r < height; ++r) {
    const std::int64_t sr = std::min(grid.height - 1, ((2 * r + 1) * grid.height) / (2 * height));
    for (std::int64_t c = 0; c < width; ++c) out.at(r, c) = grid.at(sr, cols[static_cast<std::size_t>(c)]);
  }
  return out;
}

torch::Tensor instance_region(const InstanceMap& inst, std::int32_t label) {
  require(label >= 1 && label <= inst.num_instances(), ErrorCode::kLabelOutOfRange,
          "instance " + std::to_string(label) + " outside [1, " + std::to_string(inst.num_instances()) + "]");
  return inst.grid().to_tensor().eq(label);
}

torch::Tensor boundary_map(const InstanceMap& inst) {
  const auto& g = inst.grid();
  auto out = torch::zeros({g.height, g.width}, torch::kFloat32);
  auto acc = out.accessor<float, 2>();
  for (std::int64_t r = 0; r < g.height; ++r) {
    for (std::int64_t c = 0; c < g.width; ++c) {
      const auto v = g.at(r, c);
      const bool edge = (r > 0 && g.at(r - 1, c) != v) || (r + 1 < g.height && g.at(r + 1, c) != v) ||
                        (c > 0 && g.at(r, c - 1) != v) || (c + 1 < g.width && g.at(r, c + 1) != v);
      acc[r][c] = edge ? 1.0f : 0.0f;
    }
  }
  return out;
}

void save_label_pair(const LabelPair& pair, const std::filesystem::path& dir, const std::string& stem) {
  auto to_gray = [](const LabelGrid& grid) {
    Gray16Image img;
    img.height = grid.height;
    img.width = grid.width;
    img.pixels.reserve(grid.values.size());
    for (auto v : grid.values) {
      require(v >= 0 && v <= 0xFFFF, ErrorCode::kLabelOutOfRange, "label does not fit in 16 bits");
      img.pixels.push_back(static_cast<std::uint16_t>(v));
    }
    return img;
  };
  write_png_gray16(dir / (stem + "_mask.png"), to_gray(pair.mask().grid()));
  write_png_gray16(dir / (stem + "_inst.png"), to_gray(pair.inst().grid()));
  nlohmann::json meta = {{"format", "inade-labels"},
                         {"version", kLabelFormatVersion},
                         {"num_classes", pair.num_classes()},
                         {"num_instances", pair.num_instances()},
                         {"instance_class", pair.instance_class()}};
  std::ofstream(dir / (stem + "_labels.json")) << meta.dump(1) << '\n';
}

LabelPair load_label_pair(const std::filesystem::path& dir, const std::string& stem) {
  const auto meta_path = dir / (stem + "_labels.json");
  std::ifstream in(meta_path);
  require(in.good(), ErrorCode::kFileNotFound, "missing " + meta_path.string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kCorruptFile, meta_path.string() + ": " + e.what());
  }
  if (meta.value("format", "") != "inade-labels" || meta.value("version", -1) != kLabelFormatVersion)
    fail(ErrorCode::kSchemaMismatch, meta_path.string() + " has an unsupported format or version");
  auto from_gray = [](const Gray16Image& img) {
    LabelGrid grid(img.height, img.width);
    std::copy(img.pixels.begin(), img.pixels.end(), grid.values.begin());
    return grid;
  };
  try {
    SemanticMask mask(from_gray(read_png_gray16(dir / (stem + "_mask.png"))), meta.at("num_classes").get<int>());
    InstanceMap inst(from_gray(read_png_gray16(dir / (stem + "_inst.png"))), meta.at("num_instances").get<int>());
    LabelPair pair = validate_pair(mask, inst);
    require(pair.instance_class() == meta.at("instance_class").get<std::vector<std::int32_t>>(),
            ErrorCode::kCorruptFile, meta_path.string() + ": instance_class disagrees with the label maps");
    return pair;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kSchemaMismatch, meta_path.string() + ": " + e.what());
  }
}

}  // namespace inade
