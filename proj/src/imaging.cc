// Copyright 2026 The acmap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "acmap/imaging.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>

#include "acmap/beamform.h"
#include "acmap/errors.h"

namespace acmap {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void check_dims(std::size_t w, std::size_t h, std::size_t n) {
  if (w == 0 || h == 0) throw ParameterError("image dimensions must be positive");
  if (w * h != n) throw ParameterError("pixel count does not match dimensions");
}

// libpng reports errors by longjmp; the functions that arm setjmp below
// hold only trivially destructible locals.
struct PngContext {
  png_structp png = nullptr;
  png_infop info = nullptr;
  char message[256] = "unknown libpng error";
};

void png_error_cb(png_structp png, png_const_charp msg) {
  auto* ctx = static_cast<PngContext*>(png_get_error_ptr(png));
  std::snprintf(ctx->message, sizeof(ctx->message), "%s", msg);
  png_longjmp(png, 1);
}
void png_warning_cb(png_structp, png_const_charp) {}

bool write_png_rows(PngContext& ctx, std::FILE* file, const GrayImage& image) {
  if (setjmp(png_jmpbuf(ctx.png))) return false;
  png_init_io(ctx.png, file);
  png_set_compression_level(ctx.png, 0);
  png_set_filter(ctx.png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
  png_set_IHDR(ctx.png, ctx.info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_BASE,
               PNG_FILTER_TYPE_BASE);
  png_write_info(ctx.png, ctx.info);
  for (std::size_t y = 0; y < image.height; ++y) {
    png_write_row(ctx.png, image.pixels.data() + y * image.width);
  }
  png_write_end(ctx.png, nullptr);
  return true;
}

bool read_png_header(PngContext& ctx, std::FILE* file, png_uint_32* width,
                     png_uint_32* height) {
  if (setjmp(png_jmpbuf(ctx.png))) return false;
  png_init_io(ctx.png, file);
  png_read_info(ctx.png, ctx.info);
  const png_byte color = png_get_color_type(ctx.png, ctx.info);
  const png_byte depth = png_get_bit_depth(ctx.png, ctx.info);
  if (depth == 16) png_set_strip_16(ctx.png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(ctx.png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(ctx.png);
  }
  if (color & PNG_COLOR_MASK_COLOR) {
    png_set_rgb_to_gray_fixed(ctx.png, 1, -1, -1);
  }
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(ctx.png);
  png_read_update_info(ctx.png, ctx.info);
  *width = png_get_image_width(ctx.png, ctx.info);
  *height = png_get_image_height(ctx.png, ctx.info);
  return true;
}

bool read_png_rows(PngContext& ctx, png_bytepp rows) {
  if (setjmp(png_jmpbuf(ctx.png))) return false;
  png_read_image(ctx.png, rows);
  png_read_end(ctx.png, nullptr);
  return true;
}

}  // namespace

AcousticImage::AcousticImage(std::size_t w, std::size_t h, std::vector<double> v)
    : width(w), height(h), values(std::move(v)) {
  check_dims(width, height, values.size());
  for (double x : values) {
    if (!std::isfinite(x)) throw ParameterError("acoustic image is not finite");
  }
}

AcousticImage::AcousticImage(const SrpMap& map)
    : AcousticImage(map.width, map.height, map.values) {}

GrayImage::GrayImage(std::size_t w, std::size_t h, std::uint8_t fill)
    : width(w), height(h), pixels(w * h, fill) {
  check_dims(width, height, pixels.size());
}

GrayImage::GrayImage(std::size_t w, std::size_t h, std::vector<std::uint8_t> p)
    : width(w), height(h), pixels(std::move(p)) {
  check_dims(width, height, pixels.size());
}

std::uint8_t quantize_u8(double value) {
  const double r = std::round(value);
  return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

GrayImage normalize_minmax(const AcousticImage& image, bool allow_constant) {
  check_dims(image.width, image.height, image.values.size());
  const auto [lo, hi] =
      std::minmax_element(image.values.begin(), image.values.end());
  const double mn = *lo;
  const double range = *hi - mn;
  GrayImage out(image.width, image.height);
  if (!(range > 0.0)) {
    if (allow_constant) return out;
    throw DegenerateRangeError("cannot min-max normalize a constant image");
  }
  for (std::size_t i = 0; i < image.values.size(); ++i) {
    out.pixels[i] = quantize_u8((image.values[i] - mn) * 255.0 / range);
  }
  return out;
}

void encode_png(const GrayImage& image, const std::string& path) {
  check_dims(image.width, image.height, image.pixels.size());
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot write PNG '" + path + "'");
  PngContext ctx;
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &ctx, png_error_cb,
                                    png_warning_cb);
  ctx.info = ctx.png ? png_create_info_struct(ctx.png) : nullptr;
  const bool ok = ctx.info && write_png_rows(ctx, file.get(), image);
  png_destroy_write_struct(&ctx.png, &ctx.info);
  if (!ok) throw IoError(path + ": " + ctx.message);
  if (std::fflush(file.get()) != 0) {
    throw IoError("failed writing '" + path + "'");
  }
}

GrayImage decode_png(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open PNG '" + path + "'");
  PngContext ctx;
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &ctx, png_error_cb,
                                   png_warning_cb);
  ctx.info = ctx.png ? png_create_info_struct(ctx.png) : nullptr;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  bool ok = ctx.info && read_png_header(ctx, file.get(), &width, &height) &&
            width > 0 && height > 0;
  GrayImage image;
  if (ok) {
    image = GrayImage(width, height);
    std::vector<png_bytep> rows(height);
    for (std::size_t y = 0; y < height; ++y) {
      rows[y] = image.pixels.data() + y * image.width;
    }
    ok = read_png_rows(ctx, rows.data());
  }
  png_destroy_read_struct(&ctx.png, &ctx.info, nullptr);
  if (!ok) throw IoError(path + ": " + ctx.message);
  return image;
}

std::vector<double> row_profile(const AcousticImage& image, std::size_t row) {
  if (row >= image.height) throw ParameterError("row index out of range");
  const auto first = image.values.begin() +
                     static_cast<std::ptrdiff_t>(row * image.width);
  return {first, first + static_cast<std::ptrdiff_t>(image.width)};
}

std::vector<double> row_profile(const GrayImage& image, std::size_t row) {
  if (row >= image.height) throw ParameterError("row index out of range");
  std::vector<double> out(image.width);
  for (std::size_t x = 0; x < image.width; ++x) out[x] = image.at(x, row);
  return out;
}

void write_row_profile_csv(const std::vector<double>& profile,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "column_index,value\n" << std::setprecision(17);
  for (std::size_t x = 0; x < profile.size(); ++x) {
    out << x << ',' << profile[x] << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace acmap
