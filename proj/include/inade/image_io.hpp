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
#include <vector>

#include <torch/types.h>

namespace inade {

struct Rgb8Image {
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<std::uint8_t> pixels;  // interleaved RGB, row-major
};

struct Gray16Image {
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<std::uint16_t> pixels;
};

// PNG codecs; decoding failures raise Error(kCorruptFile), missing files kFileNotFound.
void write_png_rgb8(const std::filesystem::path& path, const Rgb8Image& image);
Rgb8Image read_png_rgb8(const std::filesystem::path& path);
void write_png_gray16(const std::filesystem::path& path, const Gray16Image& image);
Gray16Image read_png_gray16(const std::filesystem::path& path);

/// float [3, H, W] in [-1, 1] -> 8-bit, round((v + 1) * 127.5) clamped.
Rgb8Image tensor_to_rgb8(const torch::Tensor& image);
/// 8-bit -> float [3, H, W], v = u / 127.5 - 1.
torch::Tensor rgb8_to_tensor(const Rgb8Image& image);

/// Snaps a [-1, 1] image onto the 8-bit grid so that saving it is lossless.
torch::Tensor quantize_to_rgb8_grid(const torch::Tensor& image);

/// Tiles equally sized images into a grid with `cols` columns and a `gap` pixel border.
Rgb8Image contact_sheet(const std::vector<Rgb8Image>& tiles, int cols, int gap = 2);

}  // namespace inade
