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

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "acmap/errors.h"
#include "acmap/srtools.h"
#include "catch_amalgamated.hpp"

namespace acmap {
namespace {

using Catch::Approx;

GrayImage random_gray(std::size_t w, std::size_t h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GrayImage g(w, h);
  for (auto& p : g.pixels) p = static_cast<std::uint8_t>(rng() % 256);
  return g;
}

// Smooth test content, closer to heatmaps than white noise.
GrayImage blob(std::size_t w, std::size_t h) {
  GrayImage g(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double dx = (x - 0.3 * w) / (0.2 * w);
      const double dy = (y - 0.6 * h) / (0.25 * h);
      g.at(x, y) = static_cast<std::uint8_t>(
          std::lround(255.0 * std::exp(-0.5 * (dx * dx + dy * dy))));
    }
  }
  return g;
}

GrayImage mirrored(const GrayImage& g) {
  GrayImage m(g.width, g.height);
  for (std::size_t y = 0; y < g.height; ++y) {
    for (std::size_t x = 0; x < g.width; ++x) {
      m.at(x, y) = g.at(g.width - 1 - x, y);
    }
  }
  return m;
}

double keys(double x) {
  x = std::abs(x);
  if (x < 1) return 1.5 * x * x * x - 2.5 * x * x + 1;
  if (x < 2) return -0.5 * x * x * x + 2.5 * x * x - 4 * x + 2;
  return 0;
}

std::int64_t mirror_index(std::int64_t i, std::int64_t n) {
  while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - 1 - i;
  return i;
}

// Dense per-output-pixel resampling straight from the kernel definition.
GrayImage bicubic_oracle(const GrayImage& in, double s) {
  const auto ow = static_cast<std::size_t>(std::lround(in.width * s));
  const auto oh = static_cast<std::size_t>(std::lround(in.height * s));
  const double ks = std::min(1.0, s);
  auto axis = [&](std::size_t o, std::size_t n) {
    std::vector<std::pair<std::int64_t, double>> w;
    const double u = (o + 0.5) / s - 0.5;
    double sum = 0;
    for (auto j = static_cast<std::int64_t>(std::floor(u - 2 / ks)) - 1;
         j <= static_cast<std::int64_t>(std::ceil(u + 2 / ks)) + 1; ++j) {
      const double k = keys(ks * (u - j));
      if (k != 0) {
        w.emplace_back(mirror_index(j, static_cast<std::int64_t>(n)), k);
        sum += k;
      }
    }
    for (auto& p : w) p.second /= sum;
    return w;
  };
  GrayImage out(ow, oh);
  for (std::size_t y = 0; y < oh; ++y) {
    const auto wy = axis(y, in.height);
    for (std::size_t x = 0; x < ow; ++x) {
      const auto wx = axis(x, in.width);
      double acc = 0;
      for (auto [iy, ky] : wy) {
        for (auto [ix, kx] : wx) {
          acc += ky * kx * in.at(static_cast<std::size_t>(ix),
                                 static_cast<std::size_t>(iy));
        }
      }
      out.at(x, y) = static_cast<std::uint8_t>(
          std::clamp(std::floor(acc + 0.5), 0.0, 255.0));
    }
  }
  return out;
}

int max_abs_diff(const GrayImage& a, const GrayImage& b) {
  int d = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    d = std::max(d, std::abs(int{a.pixels[i]} - int{b.pixels[i]}));
  }
  return d;
}

TEST_CASE("cubic kernel", "[srtools]") {
  CHECK(cubic_kernel(0.0) == 1.0);
  CHECK(cubic_kernel(1.0) == 0.0);
  CHECK(cubic_kernel(2.0) == 0.0);
  CHECK(cubic_kernel(0.5) == Approx(0.5625));
  CHECK(cubic_kernel(1.5) == Approx(-0.0625));
  CHECK(cubic_kernel(-0.5) == cubic_kernel(0.5));
}

TEST_CASE("bicubic trivial cases", "[srtools]") {
  const GrayImage flat(9, 5, std::uint8_t{77});
  for (Scale s : {Scale{2, 1}, Scale{8, 1}, Scale{1, 1}}) {
    const GrayImage out = bicubic_resize(flat, s);
    CHECK(out.width == 9 * s.num / s.den);
    for (auto p : out.pixels) CHECK(p == 77);
  }
  const GrayImage g = random_gray(13, 7, 2);
  CHECK(bicubic_resize(g, {1, 1}) == g);
  CHECK_THROWS_AS(bicubic_resize(g, {1, 2}), ParameterError);
  CHECK_THROWS_AS(bicubic_resize(g, {0, 1}), ParameterError);
}

TEST_CASE("bicubic ramp matches the closed-form kernel", "[srtools][oracle]") {
  GrayImage ramp(16, 1);
  for (std::size_t x = 0; x < 16; ++x) ramp.at(x, 0) = static_cast<std::uint8_t>(10 * x);
  const GrayImage up = bicubic_resize(ramp, {2, 1});
  REQUIRE(up.width == 32);
  for (std::size_t o = 4; o < 28; ++o) {
    // Interior outputs sit at quarter offsets from input samples; cubic
    // convolution reproduces linear ramps there.
    const double u = (o + 0.5) / 2.0 - 0.5;
    CHECK(int{up.at(o, 0)} == std::lround(10.0 * u));
  }
  CHECK(up == bicubic_oracle(ramp, 2.0));
}

TEST_CASE("bicubic matches a dense oracle", "[srtools][oracle]") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const GrayImage g = random_gray(12, 8, seed);
    CHECK(max_abs_diff(bicubic_resize(g, {2, 1}), bicubic_oracle(g, 2.0)) <= 1);
    CHECK(max_abs_diff(bicubic_resize(g, {4, 1}), bicubic_oracle(g, 4.0)) <= 1);
    CHECK(max_abs_diff(bicubic_resize(g, {1, 2}), bicubic_oracle(g, 0.5)) <= 1);
    CHECK(max_abs_diff(bicubic_resize(g, {1, 4}), bicubic_oracle(g, 0.25)) <= 1);
  }
}

TEST_CASE("resampling and blur commute with mirroring", "[srtools][property]") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const GrayImage g = random_gray(10, 6, seed);
    CHECK(max_abs_diff(bicubic_resize(mirrored(g), {2, 1}),
                       mirrored(bicubic_resize(g, {2, 1}))) <= 1);
    CHECK(max_abs_diff(gaussian_blur(mirrored(g), 8),
                       mirrored(gaussian_blur(g, 8))) <= 1);
    CHECK(max_abs_diff(gaussian_blur(mirrored(g), 5),
                       mirrored(gaussian_blur(g, 5))) <= 1);
  }
}

TEST_CASE("gaussian kernels", "[srtools]") {
  CHECK(default_gaussian_sigma(8) == Approx(1.55));
  CHECK(default_gaussian_sigma(3) == Approx(0.8));
  const auto k5 = gaussian_kernel(5, 1.0);
  REQUIRE(k5.size() == 5);
  const double norm5 = 1 + 2 * std::exp(-0.5) + 2 * std::exp(-2.0);
  CHECK(k5[2] == Approx(1 / norm5));
  CHECK(k5[0] == Approx(std::exp(-2.0) / norm5));

  const auto k8 = gaussian_kernel(8, 1.55);
  REQUIRE(k8.size() == 9);
  double sum = 0;
  for (std::size_t j = 0; j < 9; ++j) {
    sum += k8[j];
    CHECK(k8[j] == Approx(k8[8 - j]).margin(1e-15));
  }
  CHECK(sum == Approx(1.0).margin(1e-12));
  // Half-integer sample points: g(+-0.5), g(+-1.5), ... averaged pairwise.
  std::vector<double> half(8);
  double hs = 0;
  for (int j = 0; j < 8; ++j) {
    const double x = j - 3.5;
    half[j] = std::exp(-x * x / (2 * 1.55 * 1.55));
    hs += half[j];
  }
  CHECK(k8[4] == Approx((half[3] + half[4]) / (2 * hs)));
  CHECK(k8[0] == Approx(half[0] / (2 * hs)));
  CHECK_THROWS_AS(gaussian_kernel(0, 1.0), ParameterError);
  CHECK_THROWS_AS(gaussian_kernel(3, 0.0), ParameterError);
}

TEST_CASE("gaussian blur trivial cases", "[srtools]") {
  GrayImage delta(15, 15);
  delta.at(7, 7) = 200;
  const auto k = gaussian_kernel(5, 1.1);
  const GrayImage out = gaussian_blur(delta, 5, 1.1);
  for (int dy = -2; dy <= 2; ++dy) {
    for (int dx = -2; dx <= 2; ++dx) {
      CHECK(int{out.at(7 + dx, 7 + dy)} ==
            std::lround(200 * k[dx + 2] * k[dy + 2]));
    }
  }
  const GrayImage flat(7, 4, std::uint8_t{91});
  CHECK(gaussian_blur(flat, 8) == flat);
  CHECK(gaussian_blur(flat, 1) == flat);
}

TEST_CASE("gaussian blur matches dense 2-D convolution", "[srtools][oracle]") {
  auto reflect101 = [](std::int64_t i, std::int64_t n) {
    while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
    return static_cast<std::size_t>(i);
  };
  for (int size : {3, 5, 8}) {
    const GrayImage g = random_gray(20, 14, static_cast<std::uint64_t>(size));
    const auto k = gaussian_kernel(size, default_gaussian_sigma(size));
    const auto r = static_cast<std::int64_t>(k.size() / 2);
    const GrayImage out = gaussian_blur(g, size);
    for (std::int64_t y = 0; y < 14; ++y) {
      for (std::int64_t x = 0; x < 20; ++x) {
        double acc = 0;
        for (std::int64_t j = -r; j <= r; ++j) {
          for (std::int64_t i = -r; i <= r; ++i) {
            acc += k[j + r] * k[i + r] *
                   g.at(reflect101(x + i, 20), reflect101(y + j, 14));
          }
        }
        REQUIRE(std::abs(out.at(x, y) - acc) <= 0.5 + 1e-9);
      }
    }
  }
}

TEST_CASE("psnr by hand", "[srtools]") {
  const GrayImage a = random_gray(16, 12, 1);
  CHECK(std::isinf(psnr(a, a)));
  CHECK(psnr(GrayImage(4, 4, std::uint8_t{0}), GrayImage(4, 4, std::uint8_t{255})) ==
        Approx(0.0).margin(1e-12));
  GrayImage b = a;
  b.pixels[37] = static_cast<std::uint8_t>(b.pixels[37] == 255 ? 254 : b.pixels[37] + 1);
  CHECK(psnr(a, b) == Approx(10 * std::log10(255.0 * 255.0 * 192)));
  const GrayImage c = random_gray(16, 12, 2);
  CHECK(psnr(a, c) == psnr(c, a));
  CHECK_THROWS_AS(psnr(a, GrayImage(3, 3)), ParameterError);
}

// Direct per-window SSIM with centred moments.
double ssim_oracle(const GrayImage& a, const GrayImage& b) {
  double g[11];
  double gs = 0;
  for (int i = 0; i < 11; ++i) {
    g[i] = std::exp(-(i - 5) * (i - 5) / (2 * 1.5 * 1.5));
    gs += g[i];
  }
  const double c1 = 6.5025, c2 = 58.5225;
  double total = 0;
  std::size_t count = 0;
  for (std::size_t y0 = 0; y0 + 11 <= a.height; ++y0) {
    for (std::size_t x0 = 0; x0 + 11 <= a.width; ++x0) {
      double ma = 0, mb = 0;
      for (int j = 0; j < 11; ++j) {
        for (int i = 0; i < 11; ++i) {
          const double w = g[i] * g[j] / (gs * gs);
          ma += w * a.at(x0 + i, y0 + j);
          mb += w * b.at(x0 + i, y0 + j);
        }
      }
      double va = 0, vb = 0, cov = 0;
      for (int j = 0; j < 11; ++j) {
        for (int i = 0; i < 11; ++i) {
          const double w = g[i] * g[j] / (gs * gs);
          const double da = a.at(x0 + i, y0 + j) - ma;
          const double db = b.at(x0 + i, y0 + j) - mb;
          va += w * da * da;
          vb += w * db * db;
          cov += w * da * db;
        }
      }
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) /
               ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

TEST_CASE("ssim matches the per-window oracle", "[srtools][oracle]") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GrayImage a = random_gray(24, 19, seed);
    const GrayImage b = random_gray(24, 19, seed + 100);
    CHECK(std::abs(ssim(a, b) - ssim_oracle(a, b)) <= 1e-9);
    CHECK(ssim(a, b) == ssim(b, a));
  }
  const GrayImage x = blob(40, 30);
  const GrayImage y = gaussian_blur(x, 5);
  CHECK(std::abs(ssim(x, y) - ssim_oracle(x, y)) <= 1e-9);
}

TEST_CASE("ssim trivial cases", "[srtools]") {
  const GrayImage a = blob(30, 20);
  CHECK(ssim(a, a) == Approx(1.0).margin(1e-12));
  GrayImage neg = a;
  for (auto& p : neg.pixels) p = static_cast<std::uint8_t>(255 - p);
  CHECK(ssim(a, neg) < 1.0);
  CHECK(ssim(a, neg) >= -1.0);
  CHECK_THROWS_AS(ssim(GrayImage(10, 20), GrayImage(10, 20)), ParameterError);
  CHECK_THROWS_AS(ssim(a, GrayImage(30, 21)), ParameterError);
}

TEST_CASE("upscale methods", "[srtools]") {
  CHECK(UpscaleMethod::parse("bicubic").gaussian_kernel == 0);
  CHECK(UpscaleMethod::parse("bicubic+g8").gaussian_kernel == 8);
  CHECK(UpscaleMethod::parse("bicubic+g8").to_string() == "bicubic+g8");
  for (const char* bad : {"nearest", "bicubic+g", "bicubic+g0", "bicubic+gx"}) {
    CHECK_THROWS_AS(UpscaleMethod::parse(bad), ParameterError);
  }
  const GrayImage lr = blob(20, 15);
  const GrayImage plain = upscale(lr, 4, UpscaleMethod::parse("bicubic"));
  CHECK(plain == bicubic_resize(lr, {4, 1}));
  CHECK(upscale(lr, 4, UpscaleMethod::parse("bicubic+g8")) ==
        gaussian_blur(plain, 8));
  CHECK(format_metric(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_metric(0.5) == "0.5");
}

}  // namespace
}  // namespace acmap
