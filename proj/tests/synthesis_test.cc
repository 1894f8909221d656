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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include "acmap/errors.h"
#include "acmap/geometry.h"
#include "acmap/synthesis.h"
#include "catch_amalgamated.hpp"

namespace acmap {
namespace {

using Catch::Approx;
constexpr double kPi = std::numbers::pi;

MicrophoneArray single_mic() { return MicrophoneArray("one", {{{0, 0, 0}}}); }

MicCapture pcm(std::vector<std::vector<double>> channels, double rate) {
  MicCapture c;
  c.sampling_rate = rate;
  c.stage = CaptureStage::kRawPcm;
  c.channels = std::move(channels);
  return c;
}

MicCapture pdm(std::vector<double> bits, double rate) {
  MicCapture c = pcm({std::move(bits)}, rate);
  c.stage = CaptureStage::kPdm;
  return c;
}

// N-fold length-D box convolution of integer samples, evaluated at
// n = kD + D - 1 and scaled by D^N.
std::vector<double> box_oracle(const std::vector<double>& x, int order, int d) {
  std::vector<std::int64_t> cur(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    cur[n] = static_cast<std::int64_t>(x[n]);
  }
  for (int s = 0; s < order; ++s) {
    std::vector<std::int64_t> next(cur.size(), 0);
    for (std::size_t n = 0; n < cur.size(); ++n) {
      for (int j = 0; j < d && static_cast<std::size_t>(j) <= n; ++j) {
        next[n] += cur[n - static_cast<std::size_t>(j)];
      }
    }
    cur = std::move(next);
  }
  const double gain = std::pow(static_cast<double>(d), order);
  std::vector<double> y;
  for (std::size_t n = static_cast<std::size_t>(d) - 1; n < cur.size();
       n += static_cast<std::size_t>(d)) {
    y.push_back(static_cast<double>(cur[n]) / gain);
  }
  return y;
}

TEST_CASE("single path is a delayed sinusoid", "[synthesis]") {
  SoundSource s;
  s.frequency_hz = 1000.0;
  s.distance_m = 1.0;
  Scene scene{{s}, 0.05, 0.06};
  const MicCapture c = synthesize_scene(scene, single_mic(), 48000.0, 343.0);
  REQUIRE(c.channel_count() == 1);
  REQUIRE(c.length() == 480);
  CHECK(c.stage == CaptureStage::kRawPcm);
  for (std::size_t k = 0; k < c.length(); ++k) {
    const double t = 0.05 + static_cast<double>(k) / 48000.0;
    CHECK(c.channels[0][k] ==
          Approx(std::sin(2 * kPi * 1000.0 * (t - 1.0 / 343.0))).margin(1e-9));
  }
}

TEST_CASE("synthesis is linear in the sources", "[synthesis][property]") {
  const MicrophoneArray umap = build_umap_array();
  SoundSource a{-20.0, 5.0, 1.0, 3000.0, 0.7, 0.3};
  SoundSource b{12.0, -3.0, 2.0, 4500.0, 1.3, -1.0};
  const double fs = 32000.0;
  const MicCapture ab = synthesize_scene({{a, b}, 0.05, 0.07}, umap, fs, 343.0);
  const MicCapture ca = synthesize_scene({{a}, 0.05, 0.07}, umap, fs, 343.0);
  const MicCapture cb = synthesize_scene({{b}, 0.05, 0.07}, umap, fs, 343.0);
  for (std::size_t m = 0; m < umap.size(); ++m) {
    for (std::size_t k = 0; k < ab.length(); ++k) {
      REQUIRE(ab.channels[m][k] == ca.channels[m][k] + cb.channels[m][k]);
    }
  }
}

TEST_CASE("mirrored sources permute mirrored channels", "[synthesis]") {
  const MicrophoneArray umap = build_umap_array();
  // Mirror permutation: microphone m -> the one at (-x, y).
  std::vector<std::size_t> mirror(umap.size());
  for (std::size_t m = 0; m < umap.size(); ++m) {
    for (std::size_t q = 0; q < umap.size(); ++q) {
      if (umap[q].position.x == -umap[m].position.x &&
          umap[q].position.y == umap[m].position.y) {
        mirror[m] = q;
      }
    }
  }
  SoundSource left{-76.0, 0.0, 1.0, 4000.0, 1.0, 0.0};
  SoundSource right{76.0, 0.0, 1.0, 4000.0, 1.0, 0.0};
  const MicCapture c =
      synthesize_scene({{left, right}, 0.05, 0.06}, umap, 130208.0, 343.0);
  for (std::size_t m = 0; m < umap.size(); ++m) {
    for (std::size_t k = 0; k < c.length(); ++k) {
      REQUIRE(c.channels[mirror[m]][k] ==
              Approx(c.channels[m][k]).margin(1e-12));
    }
  }
}

TEST_CASE("synthesis validation", "[synthesis]") {
  SoundSource s;
  s.frequency_hz = 30000.0;
  CHECK_THROWS_AS(synthesize_scene({{s}, 0.0, 0.01}, single_mic(), 48000.0, 343),
                  ParameterError);
  s.frequency_hz = 1000.0;
  CHECK_THROWS_AS(synthesize_scene({{}, 0.0, 0.01}, single_mic(), 48000, 343),
                  ParameterError);
  CHECK_THROWS_AS(synthesize_scene({{s}, 0.02, 0.01}, single_mic(), 48000, 343),
                  ParameterError);
  s.distance_m = 0.0;
  CHECK_THROWS_AS(synthesize_scene({{s}, 0.0, 0.01}, single_mic(), 48000, 343),
                  ParameterError);
}

TEST_CASE("scene files round trip", "[synthesis]") {
  const auto path = std::filesystem::temp_directory_path() / "acmap_scene.json";
  Scene scene{{{-14.0, 2.5, 1.0, 2500.0, 0.5, 0.25}, {14.0, 0, 1.5, 7000, 1, 0}},
              0.05, 0.1};
  save_scene(scene, path.string());
  const Scene back = load_scene(path.string());
  REQUIRE(back.sources.size() == 2);
  CHECK(back.sources[0].azimuth_deg == -14.0);
  CHECK(back.sources[0].elevation_deg == 2.5);
  CHECK(back.sources[0].phase_rad == 0.25);
  CHECK(back.sources[1].distance_m == 1.5);
  CHECK(back.end_time == 0.1);
  {
    std::ofstream out(path);
    out << "{\"format\":\"something-else\",\"version\":1}";
  }
  CHECK_THROWS_AS(load_scene(path.string()), ParameterError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_scene(path.string()), IoError);
}

TEST_CASE("capture files round trip bit-exactly", "[synthesis]") {
  const auto path = std::filesystem::temp_directory_path() / "acmap_cap.bin";
  const MicCapture c = synthesize_scene(
      {{{10.0, 0, 1, 3000, 1, 0}}, 0.05, 0.052}, build_umap_array(), 32000, 343);
  save_capture(c, path.string());
  const MicCapture back = load_capture(path.string());
  CHECK(back.sampling_rate == c.sampling_rate);
  CHECK(back.stage == c.stage);
  CHECK(back.channels == c.channels);
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTACAPTURE";
  }
  CHECK_THROWS_AS(load_capture(path.string()), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("capture validation", "[synthesis]") {
  MicCapture ragged = pcm({{0.0, 1.0}, {0.0}}, 1000.0);
  CHECK_THROWS_AS(ragged.validate(), ParameterError);
  MicCapture bad = pdm({1.0, 0.5}, 1000.0);
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  CHECK(parse_capture_stage(to_string(CaptureStage::kPostFir)) ==
        CaptureStage::kPostFir);
}

TEST_CASE("sigma-delta limit cycles", "[synthesis]") {
  const MicCapture zero =
      sigma_delta_modulate(pcm({std::vector<double>(64, 0.0)}, 1e6));
  CHECK(zero.stage == CaptureStage::kPdm);
  const auto& z = zero.channels[0];
  for (std::size_t k = 1; k < z.size(); ++k) CHECK(z[k] == -z[k - 1]);
  for (std::size_t k = 0; k + 8 <= z.size(); k += 2) {
    CHECK(std::accumulate(z.begin() + k, z.begin() + k + 8, 0.0) == 0.0);
  }
  const MicCapture one =
      sigma_delta_modulate(pcm({std::vector<double>(64, 1.0)}, 1e6));
  for (double v : one.channels[0]) CHECK(v == 1.0);
  CHECK_THROWS_AS(sigma_delta_modulate(pcm({{0.2, 1.5}}, 1e6)), ParameterError);
}

TEST_CASE("sigma-delta stream tracks its input", "[synthesis]") {
  const double fs = 3125000.0;
  const std::size_t n = 62500;
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = 0.5 * std::sin(2 * kPi * 2000.0 * static_cast<double>(k) / fs);
  }
  const MicCapture bits = sigma_delta_modulate(pcm({x}, fs));
  const auto& b = bits.channels[0];
  double mean_bits = 0.0;
  for (double v : b) mean_bits += v;
  CHECK(std::abs(mean_bits / static_cast<double>(n)) < 1e-2);

  // Oracle: direct convolution with a Blackman-windowed 20 kHz low-pass.
  const int taps = 1001;
  const double fc = 20000.0 / fs;
  std::vector<double> h(taps);
  double sum = 0.0;
  for (int j = 0; j < taps; ++j) {
    const double t = j - (taps - 1) / 2.0;
    const double sinc = t == 0 ? 2 * fc : std::sin(2 * kPi * fc * t) / (kPi * t);
    const double w = 0.42 - 0.5 * std::cos(2 * kPi * j / (taps - 1)) +
                     0.08 * std::cos(4 * kPi * j / (taps - 1));
    h[j] = sinc * w;
    sum += h[j];
  }
  double signal = 0.0;
  double noise = 0.0;
  const std::size_t half = (taps - 1) / 2;
  for (std::size_t k = taps; k + taps < n; k += 7) {
    double y = 0.0;
    for (int j = 0; j < taps; ++j) y += h[j] * b[k + half - j];
    y /= sum;
    signal += x[k] * x[k];
    noise += (y - x[k]) * (y - x[k]);
  }
  CHECK(10.0 * std::log10(signal / noise) > 40.0);
}

TEST_CASE("cic on pdm input equals the box oracle exactly", "[synthesis]") {
  std::mt19937_64 rng(3);
  std::vector<double> bits(24 * 50 + 7);
  for (double& v : bits) v = (rng() & 1) ? 1.0 : -1.0;
  for (auto [order, d] : {std::pair{4, 24}, {1, 1}, {3, 5}, {5, 16}}) {
    const MicCapture out = cic_decimate(pdm(bits, 3125000.0), order, d);
    CHECK(out.stage == CaptureStage::kPostCic);
    REQUIRE(out.channels[0] == box_oracle(bits, order, d));
  }
}

TEST_CASE("cic impulse response and gain", "[synthesis]") {
  std::vector<double> impulse(24 * 8, 0.0);
  impulse[0] = 1.0;
  const std::vector<double> expected = box_oracle(impulse, 4, 24);
  const MicCapture real_out = cic_decimate(pcm({impulse}, 3125000.0), 4, 24);
  REQUIRE(real_out.length() == expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k) {
    CHECK(real_out.channels[0][k] == Approx(expected[k]).margin(1e-15));
  }
  CHECK(real_out.sampling_rate == Approx(130208.333333).margin(1e-3));

  const MicCapture dc =
      cic_decimate(pcm({std::vector<double>(24 * 20, 1.0)}, 3125000.0), 4, 24);
  for (std::size_t k = 4; k < dc.length(); ++k) {
    CHECK(dc.channels[0][k] == Approx(1.0).margin(1e-12));
  }
  const MicCapture dc_bits =
      cic_decimate(pdm(std::vector<double>(24 * 20, 1.0), 3125000.0), 4, 24);
  for (std::size_t k = 4; k < dc_bits.length(); ++k) {
    CHECK(dc_bits.channels[0][k] == 1.0);
  }
  CHECK_THROWS_AS(cic_decimate(pcm({{1.0, 2.0}}, 10.0), 4, 24), ParameterError);
}

TEST_CASE("fir design and decimation", "[synthesis]") {
  const std::vector<double> h = design_lowpass_fir(23, 0.45 / 4);
  REQUIRE(h.size() == 24);
  CHECK(std::accumulate(h.begin(), h.end(), 0.0) == Approx(1.0).margin(1e-12));
  for (std::size_t j = 0; j < h.size(); ++j) {
    CHECK(h[j] == Approx(h[h.size() - 1 - j]).margin(1e-15));
  }

  const double fs = 3125000.0 / 24;
  const MicCapture dc = fir_decimate(pcm({std::vector<double>(400, 1.0)}, fs),
                                     23, 4);
  CHECK(dc.stage == CaptureStage::kPostFir);
  CHECK(dc.sampling_rate == Approx(32552.083333).margin(1e-3));
  for (std::size_t k = 6; k < dc.length(); ++k) {
    CHECK(dc.channels[0][k] == Approx(1.0).margin(1e-12));
  }

  // A 40 kHz tone sits well past the 14.6 kHz cutoff.
  std::vector<double> tone(4000);
  for (std::size_t k = 0; k < tone.size(); ++k) {
    tone[k] = std::sin(2 * kPi * 40000.0 * static_cast<double>(k) / fs);
  }
  const MicCapture out = fir_decimate(pcm({tone}, fs), 23, 4);
  double in_ms = 0.0;
  double out_ms = 0.0;
  for (std::size_t k = 100; k < 900; ++k) {
    in_ms += tone[4 * k] * tone[4 * k];
    out_ms += out.channels[0][k] * out.channels[0][k];
  }
  CHECK(10.0 * std::log10(in_ms / out_ms) >= 20.0);
  CHECK_THROWS_AS(fir_decimate(pcm({{1.0, 1.0}}, fs), 23, 4), ParameterError);
}

TEST_CASE("demodulation chain recovers a test tone", "[synthesis]") {
  const FilterChainConfig chain;
  CHECK(chain.output_rate() == Approx(32552.083333).margin(1e-3));
  const std::size_t n = 3125000 / 20;  // 50 ms
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = 0.5 * std::sin(2 * kPi * 2000.0 * static_cast<double>(k) / chain.fs_in);
  }
  const MicCapture bits = sigma_delta_modulate(pcm({x, x}, chain.fs_in));
  const MicCapture out = demodulation_chain(bits, chain);
  CHECK(out.length() == n / 96);
  CHECK(out.channels[0] == out.channels[1]);

  // Reference: the tone sampled directly at the output rate, shifted by the
  // chain's group delay.
  const double group_delay =
      (4 * 23 / 2.0) / chain.fs_in + (23 / 2.0) * 24 / chain.fs_in;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 20; k < out.length(); ++k) {
    const double t = (static_cast<double>(k) * 96 + 95) / chain.fs_in - group_delay;
    const double ref = 0.5 * std::sin(2 * kPi * 2000.0 * t);
    const double y = out.channels[0][k];
    sxy += ref * y;
    sxx += ref * ref;
    syy += y * y;
  }
  CHECK(sxy / std::sqrt(sxx * syy) >= 0.99);
  CHECK_THROWS_AS(demodulation_chain(pcm({x}, chain.fs_in), chain),
                  ParameterError);
}

TEST_CASE("chain permutes with its channels", "[synthesis][property]") {
  const FilterChainConfig chain;
  std::mt19937_64 rng(5);
  std::vector<double> a(9600), b(9600);
  for (std::size_t k = 0; k < a.size(); ++k) {
    a[k] = (rng() & 1) ? 1.0 : -1.0;
    b[k] = (rng() & 1) ? 1.0 : -1.0;
  }
  MicCapture ab = pdm(a, chain.fs_in);
  ab.channels.push_back(b);
  MicCapture ba = pdm(b, chain.fs_in);
  ba.channels.push_back(a);
  const MicCapture x = demodulation_chain(ab, chain);
  const MicCapture y = demodulation_chain(ba, chain);
  CHECK(x.channels[0] == y.channels[1]);
  CHECK(x.channels[1] == y.channels[0]);
}

TEST_CASE("chain is shift covariant on the decimated grid",
          "[synthesis][property]") {
  const FilterChainConfig chain;
  std::mt19937_64 rng(9);
  std::vector<double> a(96 * 60);
  for (double& v : a) v = (rng() & 1) ? 1.0 : -1.0;
  std::vector<double> shifted(96, -1.0);
  shifted.insert(shifted.end(), a.begin(), a.end() - 96);
  const MicCapture x = demodulation_chain(pdm(a, chain.fs_in), chain);
  const MicCapture y = demodulation_chain(pdm(shifted, chain.fs_in), chain);
  for (std::size_t k = 10; k + 1 < x.length(); ++k) {
    CHECK(y.channels[0][k + 1] == Approx(x.channels[0][k]).margin(1e-12));
  }
}

TEST_CASE("acquisition stages and rates", "[synthesis]") {
  AcquisitionConfig direct;
  CHECK(direct.beamforming_rate() == 3125000.0 / 24);
  direct.das_stage = CaptureStage::kPostFir;
  CHECK(direct.beamforming_rate() == 3125000.0 / 24 / 4);
  direct.das_rate = 48000.0;
  CHECK(direct.beamforming_rate() == 48000.0);
  direct.das_stage = CaptureStage::kPdm;
  CHECK_THROWS_AS(direct.validate(), ParameterError);

  const MicrophoneArray umap = build_umap_array();
  const std::vector<PointSource> src = {{{0.3, 0.0, 1.0}, 3000.0, 1.0, 0.0}};
  for (auto stage : {CaptureStage::kPostCic, CaptureStage::kPostFir}) {
    AcquisitionConfig a;
    a.das_stage = stage;
    const MicCapture ref = acquire(src, umap, 0.05, 0.06, a);
    a.pipeline = Pipeline::kPdm;
    const MicCapture full = acquire(src, umap, 0.05, 0.06, a);
    CHECK(full.sampling_rate == a.beamforming_rate());
    CHECK(full.stage == stage);
    REQUIRE(full.channel_count() == 12);
    CHECK(std::abs(static_cast<double>(full.length()) -
                   static_cast<double>(ref.length())) <= 2.0);
    // The chain output follows the scaled tone up to filter delay.
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    const std::size_t len = std::min(full.length(), ref.length());
    for (std::size_t lag = 0; lag < 4; ++lag) {
      double c = 0.0, xx = 0.0, yy = 0.0;
      for (std::size_t k = 8; k + lag < len; ++k) {
        c += ref.channels[0][k] * full.channels[0][k + lag];
        xx += ref.channels[0][k] * ref.channels[0][k];
        yy += full.channels[0][k + lag] * full.channels[0][k + lag];
      }
      if (c / std::sqrt(xx * yy) > sxy / std::sqrt(std::max(sxx * syy, 1e-300))) {
        sxy = c;
        sxx = xx;
        syy = yy;
      }
    }
    CHECK(sxy / std::sqrt(sxx * syy) > 0.95);
  }
}

}  // namespace
}  // namespace acmap
