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

#include "acmap/srtools.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "acmap/errors.h"

namespace acmap {
namespace {

constexpr double kCubicA = -0.5;

// Half-sample symmetric extension: ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
std::size_t reflect_symmetric(std::int64_t i, std::int64_t n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
  }
  return static_cast<std::size_t>(i);
}

// Reflect-101 extension: ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...
std::size_t reflect_101(std::int64_t i, std::int64_t n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return static_cast<std::size_t>(i);
}

struct Contribution {
  std::vector<std::size_t> index;
  std::vector<double> weight;
};

std::vector<Contribution> resample_weights(std::size_t in_len,
                                           std::size_t out_len, Scale scale) {
  const double s = static_cast<double>(scale.num) / scale.den;
  const double kernel_scale = std::min(s, 1.0);
  const double radius = 2.0 / kernel_scale;
  std::vector<Contribution> out(out_len);
  for (std::size_t o = 0; o < out_len; ++o) {
    const double u =
        (static_cast<double>(o) + 0.5) * scale.den / scale.num - 0.5;
    const auto first = static_cast<std::int64_t>(std::ceil(u - radius));
    const auto last = static_cast<std::int64_t>(std::floor(u + radius));
    Contribution& c = out[o];
    double sum = 0.0;
    for (std::int64_t j = first; j <= last; ++j) {
      const double w =
          kernel_scale * cubic_kernel(kernel_scale * (u - static_cast<double>(j)));
      if (w == 0.0) continue;
      c.index.push_back(reflect_symmetric(j, static_cast<std::int64_t>(in_len)));
      c.weight.push_back(w);
      sum += w;
    }
    for (double& w : c.weight) w /= sum;
  }
  return out;
}

std::size_t scaled_dim(std::size_t n, Scale scale) {
  const auto num = static_cast<std::size_t>(scale.num);
  const auto den = static_cast<std::size_t>(scale.den);
  if ((n * num) % den != 0 || n * num / den == 0) {
    throw ParameterError("scale " + std::to_string(scale.num) + "/" +
                         std::to_string(scale.den) + " does not map " +
                         std::to_string(n) + " pixels to an integer size");
  }
  return n * num / den;
}

void require_same_size(const GrayImage& a, const GrayImage& b) {
  if (a.width != b.width || a.height != b.height) {
    throw ParameterError("images differ in size: " + std::to_string(a.width) +
                         "x" + std::to_string(a.height) + " vs " +
                         std::to_string(b.width) + "x" +
                         std::to_string(b.height));
  }
}

// Valid-mode separable filtering of a double plane with a square kernel.
std::vector<double> filter_valid(const std::vector<double>& plane,
                                 std::size_t w, std::size_t h,
                                 const std::vector<double>& k) {
  const std::size_t n = k.size();
  const std::size_t ow = w - n + 1;
  const std::size_t oh = h - n + 1;
  std::vector<double> tmp(ow * h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += k[j] * plane[y * w + x + j];
      tmp[y * ow + x] = acc;
    }
  }
  std::vector<double> out(ow * oh);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += k[j] * tmp[(y + j) * ow + x];
      out[y * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double cubic_kernel(double x) {
  const double ax = std::abs(x);
  if (ax <= 1.0) {
    return ((kCubicA + 2.0) * ax - (kCubicA + 3.0)) * ax * ax + 1.0;
  }
  if (ax < 2.0) {
    return ((kCubicA * ax - 5.0 * kCubicA) * ax + 8.0 * kCubicA) * ax -
           4.0 * kCubicA;
  }
  return 0.0;
}

GrayImage bicubic_resize(const GrayImage& image, Scale scale) {
  if (scale.num <= 0 || scale.den <= 0) {
    throw ParameterError("scale must be a positive fraction");
  }
  const std::size_t ow = scaled_dim(image.width, scale);
  const std::size_t oh = scaled_dim(image.height, scale);
  const auto wx = resample_weights(image.width, ow, scale);
  const auto wy = resample_weights(image.height, oh, scale);

  std::vector<double> tmp(ow * image.height);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t t = 0; t < wx[x].index.size(); ++t) {
        acc += wx[x].weight[t] * image.at(wx[x].index[t], y);
      }
      tmp[y * ow + x] = acc;
    }
  }
  GrayImage out(ow, oh);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t t = 0; t < wy[y].index.size(); ++t) {
        acc += wy[y].weight[t] * tmp[wy[y].index[t] * ow + x];
      }
      out.at(x, y) = quantize_u8(acc);
    }
  }
  return out;
}

double default_gaussian_sigma(int kernel_size) {
  return 0.3 * ((kernel_size - 1) * 0.5 - 1.0) + 0.8;
}

std::vector<double> gaussian_kernel(int kernel_size, double sigma) {
  if (kernel_size < 1) throw ParameterError("Gaussian kernel size must be >= 1");
  if (!(sigma > 0.0)) throw ParameterError("Gaussian sigma must be positive");
  const auto k = static_cast<std::size_t>(kernel_size);
  std::vector<double> g(k);
  const double mid = 0.5 * static_cast<double>(kernel_size - 1);
  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double x = static_cast<double>(j) - mid;
    g[j] = std::exp(-x * x / (2.0 * sigma * sigma));
    sum += g[j];
  }
  for (double& v : g) v /= sum;
  if (k % 2 == 1) return g;
  std::vector<double> taps(k + 1, 0.0);
  for (std::size_t t = 0; t <= k; ++t) {
    const double left = t > 0 ? g[t - 1] : 0.0;
    const double right = t < k ? g[t] : 0.0;
    taps[t] = 0.5 * (left + right);
  }
  return taps;
}

GrayImage gaussian_blur(const GrayImage& image, int kernel_size,
                        std::optional<double> sigma) {
  const double s = sigma.value_or(default_gaussian_sigma(kernel_size));
  const std::vector<double> k = gaussian_kernel(kernel_size, s);
  const auto r = static_cast<std::int64_t>(k.size() / 2);
  const auto w = static_cast<std::int64_t>(image.width);
  const auto h = static_cast<std::int64_t>(image.height);
  std::vector<double> tmp(image.pixels.size());
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::int64_t j = -r; j <= r; ++j) {
        acc += k[static_cast<std::size_t>(j + r)] *
               image.at(reflect_101(x + j, w), static_cast<std::size_t>(y));
      }
      tmp[static_cast<std::size_t>(y * w + x)] = acc;
    }
  }
  GrayImage out(image.width, image.height);
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::int64_t j = -r; j <= r; ++j) {
        acc += k[static_cast<std::size_t>(j + r)] *
               tmp[reflect_101(y + j, h) * image.width +
                   static_cast<std::size_t>(x)];
      }
      out.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) =
          quantize_u8(acc);
    }
  }
  return out;
}

double psnr(const GrayImage& a, const GrayImage& b) {
  require_same_size(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = static_cast<double>(a.pixels[i]) - b.pixels[i];
    acc += d * d;
  }
  if (acc == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = acc / static_cast<double>(a.pixels.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double ssim(const GrayImage& a, const GrayImage& b) {
  require_same_size(a, b);
  constexpr std::size_t kWindow = 11;
  if (a.width < kWindow || a.height < kWindow) {
    throw ParameterError("SSIM needs images of at least 11x11 pixels");
  }
  const std::vector<double> g = gaussian_kernel(kWindow, 1.5);
  const std::size_t n = a.pixels.size();
  std::vector<double> pa(n), pb(n), aa(n), bb(n), ab(n);
  for (std::size_t i = 0; i < n; ++i) {
    pa[i] = a.pixels[i];
    pb[i] = b.pixels[i];
    aa[i] = pa[i] * pa[i];
    bb[i] = pb[i] * pb[i];
    ab[i] = pa[i] * pb[i];
  }
  const auto mu_a = filter_valid(pa, a.width, a.height, g);
  const auto mu_b = filter_valid(pb, a.width, a.height, g);
  const auto e_aa = filter_valid(aa, a.width, a.height, g);
  const auto e_bb = filter_valid(bb, a.width, a.height, g);
  const auto e_ab = filter_valid(ab, a.width, a.height, g);
  const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i];
    const double mb = mu_b[i];
    const double va = e_aa[i] - ma * ma;
    const double vb = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    acc += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
           ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return acc / static_cast<double>(mu_a.size());
}

MetricResult compare(const GrayImage& a, const GrayImage& b) {
  return {psnr(a, b), ssim(a, b)};
}

UpscaleMethod UpscaleMethod::parse(const std::string& text) {
  if (text == "bicubic") return {};
  const std::string prefix = "bicubic+g";
  if (text.rfind(prefix, 0) == 0 && text.size() > prefix.size()) {
    int k = 0;
    const char* first = text.data() + prefix.size();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, k);
    if (ec == std::errc() && ptr == last && k >= 1) return {k};
  }
  throw ParameterError("unknown upscaling method '" + text +
                       "' (bicubic|bicubic+g<k>)");
}

std::string UpscaleMethod::to_string() const {
  return gaussian_kernel == 0 ? "bicubic"
                              : "bicubic+g" + std::to_string(gaussian_kernel);
}

GrayImage upscale(const GrayImage& image, int factor, UpscaleMethod method) {
  if (factor < 1) throw ParameterError("upscale factor must be >= 1");
  GrayImage up = bicubic_resize(image, {factor, 1});
  if (method.gaussian_kernel > 0) {
    up = gaussian_blur(up, method.gaussian_kernel);
  }
  return up;
}

std::string format_metric(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace acmap
