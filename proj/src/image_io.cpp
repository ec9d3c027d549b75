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

#include "inade/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>

#include <torch/torch.h>

#include "inade/error.hpp"

namespace inade {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    if (mode[0] == 'r') fail(ErrorCode::kFileNotFound, "cannot open " + path.string());
    fail(ErrorCode::kFileNotFound, "cannot create " + path.string());
  }
  return f;
}

void on_png_error(png_structp png, png_const_charp) { std::longjmp(png_jmpbuf(png), 1); }
void on_png_warning(png_structp, png_const_charp) {}

// Raw libpng calls live in these functions; nothing with a destructor may be
// created between setjmp and the end of the function.
bool write_png_raw(std::FILE* f, std::uint32_t width, std::uint32_t height, int bit_depth, int color_type,
                   png_bytep* rows) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, on_png_error, on_png_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, f);
  png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

struct PngHeader {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
};

// Two-phase read: first call with rows == nullptr fills the header; the caller
// allocates and calls again.
bool read_png_raw(std::FILE* f, PngHeader* header, png_bytep* rows) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, on_png_error, on_png_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, f);
  png_read_info(png, info);
  header->width = png_get_image_width(png, info);
  header->height = png_get_image_height(png, info);
  header->bit_depth = png_get_bit_depth(png, info);
  header->color_type = png_get_color_type(png, info);
  if (rows != nullptr) {
    if (header->bit_depth == 16) png_set_swap(png);
    png_read_image(png, rows);
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

PngHeader read_header(const std::filesystem::path& path) {
  auto f = open_file(path, "rb");
  PngHeader header;
  if (!read_png_raw(f.get(), &header, nullptr)) fail(ErrorCode::kCorruptFile, "unreadable PNG " + path.string());
  return header;
}

template <typename T>
void read_rows(const std::filesystem::path& path, PngHeader* header, std::vector<T>& pixels, std::size_t row_elems) {
  auto f = open_file(path, "rb");
  std::vector<png_bytep> rows(header->height);
  for (png_uint_32 r = 0; r < header->height; ++r)
    rows[r] = reinterpret_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(r) * row_elems);
  if (!read_png_raw(f.get(), header, rows.data())) fail(ErrorCode::kCorruptFile, "truncated PNG " + path.string());
}

}  // namespace

void write_png_rgb8(const std::filesystem::path& path, const Rgb8Image& image) {
  require(image.height > 0 && image.width > 0 &&
              image.pixels.size() == static_cast<std::size_t>(image.height * image.width * 3),
          ErrorCode::kShapeMismatch, "RGB buffer does not match its dimensions");
  auto f = open_file(path, "wb");
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height));
  auto* base = const_cast<std::uint8_t*>(image.pixels.data());
  for (std::int64_t r = 0; r < image.height; ++r) rows[r] = base + r * image.width * 3;
  if (!write_png_raw(f.get(), static_cast<std::uint32_t>(image.width), static_cast<std::uint32_t>(image.height), 8,
                     PNG_COLOR_TYPE_RGB, rows.data()))
    fail(ErrorCode::kCorruptFile, "failed writing " + path.string());
}

Rgb8Image read_png_rgb8(const std::filesystem::path& path) {
  PngHeader header = read_header(path);
  if (header.bit_depth != 8 || header.color_type != PNG_COLOR_TYPE_RGB)
    fail(ErrorCode::kSchemaMismatch, path.string() + " is not an 8-bit RGB PNG");
  Rgb8Image image;
  image.height = header.height;
  image.width = header.width;
  image.pixels.resize(static_cast<std::size_t>(image.height * image.width * 3));
  read_rows(path, &header, image.pixels, static_cast<std::size_t>(image.width * 3));
  return image;
}

void write_png_gray16(const std::filesystem::path& path, const Gray16Image& image) {
  require(image.height > 0 && image.width > 0 &&
              image.pixels.size() == static_cast<std::size_t>(image.height * image.width),
          ErrorCode::kShapeMismatch, "grey buffer does not match its dimensions");
  auto f = open_file(path, "wb");
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height));
  auto* base = const_cast<std::uint16_t*>(image.pixels.data());
  for (std::int64_t r = 0; r < image.height; ++r) rows[r] = reinterpret_cast<png_bytep>(base + r * image.width);
  if (!write_png_raw(f.get(), static_cast<std::uint32_t>(image.width), static_cast<std::uint32_t>(image.height), 16,
                     PNG_COLOR_TYPE_GRAY, rows.data()))
    fail(ErrorCode::kCorruptFile, "failed writing " + path.string());
}

Gray16Image read_png_gray16(const std::filesystem::path& path) {
  PngHeader header = read_header(path);
  if (header.bit_depth != 16 || header.color_type != PNG_COLOR_TYPE_GRAY)
    fail(ErrorCode::kSchemaMismatch, path.string() + " is not a 16-bit grey PNG");
  Gray16Image image;
  image.height = header.height;
  image.width = header.width;
  image.pixels.resize(static_cast<std::size_t>(image.height * image.width));
  read_rows(path, &header, image.pixels, static_cast<std::size_t>(image.width));
  return image;
}

Rgb8Image tensor_to_rgb8(const torch::Tensor& image) {
  require(image.dim() == 3 && image.size(0) == 3, ErrorCode::kShapeMismatch, "expected a [3, H, W] image");
  auto bytes = ((image.detach().to(torch::kFloat64) + 1.0) * 127.5)
                   .round()
                   .clamp(0.0, 255.0)
                   .to(torch::kUInt8)
                   .permute({1, 2, 0})
                   .contiguous();
  Rgb8Image out;
  out.height = image.size(1);
  out.width = image.size(2);
  out.pixels.assign(bytes.data_ptr<std::uint8_t>(), bytes.data_ptr<std::uint8_t>() + bytes.numel());
  return out;
}

torch::Tensor rgb8_to_tensor(const Rgb8Image& image) {
  auto bytes = torch::from_blob(const_cast<std::uint8_t*>(image.pixels.data()), {image.height, image.width, 3},
                                torch::kUInt8);
  return (bytes.permute({2, 0, 1}).to(torch::kFloat32) / 127.5f - 1.0f).contiguous();
}

torch::Tensor quantize_to_rgb8_grid(const torch::Tensor& image) { return rgb8_to_tensor(tensor_to_rgb8(image)); }

Rgb8Image contact_sheet(const std::vector<Rgb8Image>& tiles, int cols, int gap) {
  require(!tiles.empty(), ErrorCode::kConfigInvalid, "contact sheet needs at least one image");
  require(cols > 0 && gap >= 0, ErrorCode::kConfigInvalid, "contact sheet needs cols > 0 and gap >= 0");
  const auto th = tiles.front().height;
  const auto tw = tiles.front().width;
  for (const auto& t : tiles)
    require(t.height == th && t.width == tw, ErrorCode::kDimensionMismatch, "contact sheet tiles differ in size");
  const std::int64_t n = static_cast<std::int64_t>(tiles.size());
  const std::int64_t ncols = std::min<std::int64_t>(cols, n);
  const std::int64_t nrows = (n + ncols - 1) / ncols;
  Rgb8Image sheet;
  sheet.height = nrows * th + (nrows + 1) * gap;
  sheet.width = ncols * tw + (ncols + 1) * gap;
  sheet.pixels.assign(static_cast<std::size_t>(sheet.height * sheet.width * 3), 255);
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t oy = gap + (i / ncols) * (th + gap);
    const std::int64_t ox = gap + (i % ncols) * (tw + gap);
    for (std::int64_t r = 0; r < th; ++r)
      std::copy_n(tiles[i].pixels.begin() + r * tw * 3, tw * 3, sheet.pixels.begin() + ((oy + r) * sheet.width + ox) * 3);
  }
  return sheet;
}

}  // namespace inade
