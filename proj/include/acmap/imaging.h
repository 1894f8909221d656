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

// Heatmap to 8-bit image conversion, PNG I/O and row profiles.

#ifndef ACMAP_IMAGING_H_
#define ACMAP_IMAGING_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace acmap {

struct SrpMap;

struct AcousticImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;  // row-major

  AcousticImage() = default;
  AcousticImage(std::size_t w, std::size_t h, std::vector<double> v);
  explicit AcousticImage(const SrpMap& map);

  double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }
};

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  GrayImage() = default;
  GrayImage(std::size_t w, std::size_t h, std::uint8_t fill = 0);
  GrayImage(std::size_t w, std::size_t h, std::vector<std::uint8_t> p);

  std::uint8_t at(std::size_t x, std::size_t y) const {
    return pixels[y * width + x];
  }
  std::uint8_t& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

// Rounds half away from zero and clamps to [0, 255].
std::uint8_t quantize_u8(double value);

// (I - min) * 255 / (max - min), quantized. Throws DegenerateRangeError on a
// constant image unless `allow_constant`, which yields all zeros.
GrayImage normalize_minmax(const AcousticImage& image,
                           bool allow_constant = false);

// 8-bit grayscale PNG written with compression level 0.
void encode_png(const GrayImage& image, const std::string& path);
GrayImage decode_png(const std::string& path);

std::vector<double> row_profile(const AcousticImage& image, std::size_t row);
std::vector<double> row_profile(const GrayImage& image, std::size_t row);
// CSV with header "column_index,value".
void write_row_profile_csv(const std::vector<double>& profile,
                           const std::string& path);

}  // namespace acmap

#endif  // ACMAP_IMAGING_H_
