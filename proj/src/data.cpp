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

#include "inade/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "inade/error.hpp"
#include "inade/image_io.hpp"

namespace inade {

namespace fs = std::filesystem;
using nlohmann::json;

void ShapesConfig::validate() const {
  auto check = [](bool ok, const std::string& what) { require(ok, ErrorCode::kConfigInvalid, what); };
  check(height > 0 && width > 0, "image size must be positive");
  check(num_classes >= 2 && num_classes <= 4, "num_classes must be 2..4 (background plus up to 3 shape kinds)");
  check(min_shapes >= 1 && max_shapes >= min_shapes, "need 1 <= min_shapes <= max_shapes");
  check(min_extent > 0 && max_extent >= min_extent && max_extent <= 0.5, "invalid shape extent range");
  check(min_visible >= 1 && min_visible * (max_shapes + 1) <= height * width, "min_visible too large");
  check(num_samples >= 1, "num_samples must be positive");
  check(static_cast<int>(styles.size()) == num_classes, "one style per class is required");
  for (const auto& s : styles)
    check(s.hue_spread >= 0 && s.saturation >= 0 && s.saturation <= 1 && s.value >= 0 && s.value <= 1,
          "invalid class style");
}

std::array<double, 3> hsv_to_rgb(double h, double s, double v) {
  h = h - std::floor(h);
  const double x = h * 6.0;
  const int sector = std::min(5, static_cast<int>(x));
  const double f = x - sector;
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

namespace {

struct Shape {
  ShapeKind kind;
  double cx, cy, r;
};

bool covers(const Shape& s, double x, double y) {
  const double dx = x - s.cx, dy = y - s.cy;
  switch (s.kind) {
    case ShapeKind::kDisk: return dx * dx + dy * dy <= s.r * s.r;
    case ShapeKind::kSquare: return std::abs(dx) <= s.r && std::abs(dy) <= s.r;
    case ShapeKind::kTriangle:
      // apex up; base at cy + r spanning cx +- r
      if (dy < -s.r || dy > s.r) return false;
      return std::abs(dx) <= s.r * (dy + s.r) / (2 * s.r);
  }
  return false;
}

}  // namespace

Sample generate_shape_sample(const ShapesConfig& cfg, std::size_t index) {
  std::mt19937_64 eng(Rng(cfg.seed).split(index).seed());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double side = static_cast<double>(std::min(cfg.height, cfg.width));
  const int kinds = cfg.num_classes - 1;

  LabelGrid mask(cfg.height, cfg.width, 1), inst(cfg.height, cfg.width, 1);
  std::vector<std::int32_t> shape_class;
  for (int attempt = 0;; ++attempt) {
    require(attempt < 1000, ErrorCode::kConfigInvalid, "could not place visible shapes; relax the config");
    const int k = cfg.min_shapes + static_cast<int>(eng() % static_cast<std::uint64_t>(cfg.max_shapes - cfg.min_shapes + 1));
    std::vector<Shape> shapes;
    shape_class.clear();
    for (int s = 0; s < k; ++s) {
      const int kind = static_cast<int>(eng() % static_cast<std::uint64_t>(kinds));
      const double r = side * (cfg.min_extent + (cfg.max_extent - cfg.min_extent) * unit(eng));
      shapes.push_back({static_cast<ShapeKind>(kind), unit(eng) * static_cast<double>(cfg.width),
                        unit(eng) * static_cast<double>(cfg.height), r});
      shape_class.push_back(kind + 2);
    }
    std::fill(mask.values.begin(), mask.values.end(), 1);
    std::fill(inst.values.begin(), inst.values.end(), 1);
    std::vector<std::int64_t> visible(static_cast<std::size_t>(k) + 2, 0);
    for (std::int64_t y = 0; y < cfg.height; ++y)
      for (std::int64_t x = 0; x < cfg.width; ++x) {
        for (int s = k - 1; s >= 0; --s) {  // last painted is on top
          if (covers(shapes[static_cast<std::size_t>(s)], static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5)) {
            inst.at(y, x) = s + 2;
            mask.at(y, x) = shape_class[static_cast<std::size_t>(s)];
            break;
          }
        }
        ++visible[static_cast<std::size_t>(inst.at(y, x))];
      }
    if (std::all_of(visible.begin() + 1, visible.end(), [&](std::int64_t v) { return v >= cfg.min_visible; })) break;
  }

  const int num_instances = static_cast<int>(shape_class.size()) + 1;
  Sample sample;
  char id[16];
  std::snprintf(id, sizeof id, "%06zu", index);
  sample.id = id;
  std::vector<std::array<std::uint8_t, 3>> colours;
  for (int l = 1; l <= num_instances; ++l) {
    const int c = l == 1 ? 1 : shape_class[static_cast<std::size_t>(l - 2)];
    const auto& st = cfg.styles[static_cast<std::size_t>(c - 1)];
    double hue = st.hue + st.hue_spread * gauss(eng);
    hue -= std::floor(hue);
    sample.instance_hue.push_back(hue);
    const auto rgb = hsv_to_rgb(hue, st.saturation, st.value);
    colours.push_back({static_cast<std::uint8_t>(std::lround(rgb[0] * 255)),
                       static_cast<std::uint8_t>(std::lround(rgb[1] * 255)),
                       static_cast<std::uint8_t>(std::lround(rgb[2] * 255))});
  }
  Rgb8Image img{cfg.height, cfg.width, std::vector<std::uint8_t>(static_cast<std::size_t>(cfg.height * cfg.width * 3))};
  for (std::size_t p = 0; p < inst.values.size(); ++p)
    for (int ch = 0; ch < 3; ++ch) img.pixels[p * 3 + static_cast<std::size_t>(ch)] = colours[static_cast<std::size_t>(inst.values[p] - 1)][static_cast<std::size_t>(ch)];
  sample.image = rgb8_to_tensor(img);
  sample.pair = validate_pair(SemanticMask(mask, cfg.num_classes), InstanceMap(inst, num_instances));
  return sample;
}

Dataset generate_shapes(const ShapesConfig& cfg) {
  cfg.validate();
  Dataset d{cfg.height, cfg.width, cfg.num_classes, {}};
  d.samples.reserve(static_cast<std::size_t>(cfg.num_samples));
  for (int i = 0; i < cfg.num_samples; ++i) d.samples.push_back(generate_shape_sample(cfg, static_cast<std::size_t>(i)));
  return d;
}

std::vector<NoiseBank> Batch::sample_banks(std::int64_t noise_channels, Rng& rng) const {
  std::vector<NoiseBank> banks;
  for (const auto& p : pairs) banks.push_back(sample_noise_bank(p.num_instances(), noise_channels, rng));
  return banks;
}

Batch collate(std::span<const Sample> samples) {
  require(!samples.empty(), ErrorCode::kDimensionMismatch, "cannot collate an empty batch");
  Batch b;
  std::vector<torch::Tensor> images;
  for (const auto& s : samples) {
    require(s.image.sizes() == samples.front().image.sizes(), ErrorCode::kDimensionMismatch,
            "batch images differ in size");
    images.push_back(s.image);
    b.pairs.push_back(s.pair);
  }
  b.images = torch::stack(images);
  return b;
}

Batch collate(const Dataset& dataset, std::span<const std::size_t> indices) {
  std::vector<Sample> picked;
  for (auto i : indices) {
    require(i < dataset.samples.size(), ErrorCode::kIndexOutOfRange, "sample index out of range");
    picked.push_back(dataset.samples[i]);
  }
  return collate(picked);
}

namespace {

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::kFileNotFound, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kFileNotFound, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kCorruptFile, path.string() + ": " + e.what());
  }
}

}  // namespace

void save_dataset(const Dataset& dataset, const fs::path& dir) {
  fs::create_directories(dir);
  json ids = json::array();
  for (const auto& s : dataset.samples) {
    write_png_rgb8(dir / (s.id + "_image.png"), tensor_to_rgb8(s.image));
    save_label_pair(s.pair, dir, s.id);
    write_json(dir / (s.id + "_meta.json"), json{{"id", s.id}, {"instance_hue", s.instance_hue}});
    ids.push_back(s.id);
  }
  write_json(dir / "manifest.json", json{{"format", "inade-shapes"},
                                         {"version", kDatasetFormatVersion},
                                         {"height", dataset.height},
                                         {"width", dataset.width},
                                         {"num_classes", dataset.num_classes},
                                         {"samples", ids}});
}

Dataset load_dataset(const fs::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  require(fs::exists(manifest_path), ErrorCode::kFileNotFound, "no manifest.json in " + dir.string());
  const auto m = read_json(manifest_path);
  Dataset d;
  try {
    require(m.at("format") == "inade-shapes", ErrorCode::kSchemaMismatch, "not a shapes dataset manifest");
    require(m.at("version") == kDatasetFormatVersion, ErrorCode::kSchemaMismatch,
            "dataset version " + m.at("version").dump() + " is not supported");
    d.height = m.at("height").get<std::int64_t>();
    d.width = m.at("width").get<std::int64_t>();
    d.num_classes = m.at("num_classes").get<int>();
    for (const auto& id_json : m.at("samples")) {
      Sample s;
      s.id = id_json.get<std::string>();
      const auto img = read_png_rgb8(dir / (s.id + "_image.png"));
      s.image = rgb8_to_tensor(img);
      s.pair = load_label_pair(dir, s.id);
      const auto meta = read_json(dir / (s.id + "_meta.json"));
      s.instance_hue = meta.at("instance_hue").get<std::vector<double>>();
      require(img.height == d.height && img.width == d.width && s.pair.height() == d.height &&
                  s.pair.width() == d.width && s.pair.num_classes() == d.num_classes,
              ErrorCode::kSchemaMismatch, "sample " + s.id + " disagrees with the manifest");
      require(static_cast<int>(s.instance_hue.size()) == s.pair.num_instances(), ErrorCode::kSchemaMismatch,
              "sample " + s.id + " metadata disagrees with its instance map");
      d.samples.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kSchemaMismatch, std::string("malformed dataset metadata: ") + e.what());
  }
  return d;
}

}  // namespace inade
