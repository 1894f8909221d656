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

// Baseline upscalers and image quality metrics.

#ifndef ACMAP_SRTOOLS_H_
#define ACMAP_SRTOOLS_H_

#include <optional>
#include <string>
#include <vector>

#include "acmap/imaging.h"

namespace acmap {

// Positive rational scale factor num/den.
struct Scale {
  int num = 1;
  int den = 1;
};

// Keys cubic convolution kernel with a = -0.5.
double cubic_kernel(double x);

// Separable cubic-convolution resampling with half-pixel-centre alignment
// and symmetric borders. Downscaling stretches the kernel by 1/scale.
// Throws ParameterError unless both output dimensions are integers.
GrayImage bicubic_resize(const GrayImage& image, Scale scale);

// 0.3 * ((k - 1) * 0.5 - 1) + 0.8
double default_gaussian_sigma(int kernel_size);

// Normalized taps, always odd-length and centred. Even sizes sample the
// Gaussian at half-integer offsets and average the two half-pixel anchorings,
// which yields k + 1 taps.
std::vector<double> gaussian_kernel(int kernel_size, double sigma);

// Separable Gaussian with reflect-101 borders. sigma defaults to
// default_gaussian_sigma(kernel_size).
GrayImage gaussian_blur(const GrayImage& image, int kernel_size,
                        std::optional<double> sigma = std::nullopt);

// 10 log10(255^2 / MSE); +infinity for identical images.
double psnr(const GrayImage& a, const GrayImage& b);

// Mean SSIM over every fully contained 11x11 Gaussian window (sigma 1.5),
// K1 = 0.01, K2 = 0.03, L = 255. Inputs must be at least 11x11.
double ssim(const GrayImage& a, const GrayImage& b);

struct MetricResult {
  double psnr_db = 0.0;
  double ssim = 0.0;
};

MetricResult compare(const GrayImage& a, const GrayImage& b);

// "bicubic" or "bicubic+g<k>".
struct UpscaleMethod {
  int gaussian_kernel = 0;  // 0 disables the smoothing pass

  static UpscaleMethod parse(const std::string& text);
  std::string to_string() const;
};

GrayImage upscale(const GrayImage& image, int factor, UpscaleMethod method);

// "inf" for infinite values, shortest round-trip decimal otherwise.
std::string format_metric(double value);

}  // namespace acmap

#endif  // ACMAP_SRTOOLS_H_
