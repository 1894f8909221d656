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

#include "acmap/synthesis.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

#include "acmap/errors.h"
#include "json.hpp"

namespace acmap {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr char kCaptureMagic[8] = {'A', 'C', 'M', 'C', 'A', 'P', '0', '1'};

std::size_t sample_count(double start, double end, double rate) {
  const double n = std::ceil((end - start) * rate - 1e-9);
  return n > 0.0 ? static_cast<std::size_t>(n) : 0;
}

MicCapture with_channels_like(const MicCapture& in, double rate,
                              CaptureStage stage) {
  MicCapture out;
  out.sampling_rate = rate;
  out.stage = stage;
  out.channels.resize(in.channel_count());
  return out;
}

template <typename T>
void write_le(std::ostream& os, T value) {
  static_assert(std::endian::native == std::endian::little);
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

}  // namespace

Vec3 SoundSource::position() const {
  return distance_m *
         SteeringVector::from_angles(azimuth_deg, elevation_deg).direction();
}

void Scene::validate() const {
  if (sources.empty()) throw ParameterError("scene has no sources");
  if (!(start_time >= 0.0) || !(end_time > start_time)) {
    throw ParameterError("scene needs 0 <= start_time < end_time");
  }
  for (const SoundSource& s : sources) {
    if (!(s.frequency_hz > 0.0) || !(s.distance_m > 0.0) ||
        !(s.amplitude > 0.0)) {
      throw ParameterError(
          "sources need positive frequency, distance and amplitude");
    }
  }
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(path + ": " + e.what());
  }
  if (doc.value("format", "") != "acmap-scene" || doc.value("version", 0) != 1) {
    throw ParameterError(path + ": not an acmap-scene version 1 file");
  }
  Scene scene;
  try {
    scene.start_time = doc.at("start_time").get<double>();
    scene.end_time = doc.at("end_time").get<double>();
    for (const auto& s : doc.at("sources")) {
      SoundSource src;
      src.azimuth_deg = s.at("azimuth_deg").get<double>();
      src.elevation_deg = s.at("elevation_deg").get<double>();
      src.distance_m = s.at("distance_m").get<double>();
      src.frequency_hz = s.at("frequency_hz").get<double>();
      src.amplitude = s.at("amplitude").get<double>();
      src.phase_rad = s.value("phase_rad", 0.0);
      scene.sources.push_back(src);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(path + ": " + e.what());
  }
  scene.validate();
  return scene;
}

void save_scene(const Scene& scene, const std::string& path) {
  nlohmann::json doc = {{"format", "acmap-scene"},
                        {"version", 1},
                        {"start_time", scene.start_time},
                        {"end_time", scene.end_time},
                        {"sources", nlohmann::json::array()}};
  for (const SoundSource& s : scene.sources) {
    doc["sources"].push_back({{"azimuth_deg", s.azimuth_deg},
                              {"elevation_deg", s.elevation_deg},
                              {"distance_m", s.distance_m},
                              {"frequency_hz", s.frequency_hz},
                              {"amplitude", s.amplitude},
                              {"phase_rad", s.phase_rad}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scene file '" + path + "'");
  out << doc.dump(2) << '\n';
}

std::string to_string(CaptureStage stage) {
  switch (stage) {
    case CaptureStage::kRawPcm:
      return "raw_pcm";
    case CaptureStage::kPdm:
      return "pdm";
    case CaptureStage::kPostCic:
      return "post_cic";
    case CaptureStage::kPostFir:
      return "post_fir";
  }
  return "unknown";
}

CaptureStage parse_capture_stage(const std::string& text) {
  for (auto s : {CaptureStage::kRawPcm, CaptureStage::kPdm,
                 CaptureStage::kPostCic, CaptureStage::kPostFir}) {
    if (to_string(s) == text) return s;
  }
  throw ParameterError("unknown capture stage '" + text + "'");
}

void MicCapture::validate() const {
  if (!(sampling_rate > 0.0)) {
    throw ParameterError("capture sampling rate must be positive");
  }
  for (const auto& ch : channels) {
    if (ch.size() != length()) {
      throw ParameterError("capture channels differ in length");
    }
    if (stage == CaptureStage::kPdm) {
      for (double v : ch) {
        if (v != 1.0 && v != -1.0) {
          throw ParameterError("PDM capture holds a value other than +/-1");
        }
      }
    }
  }
}

void save_capture(const MicCapture& capture, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write capture file '" + path + "'");
  out.write(kCaptureMagic, sizeof(kCaptureMagic));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(capture.channel_count()));
  write_le<std::uint64_t>(out, capture.length());
  write_le<double>(out, capture.sampling_rate);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(capture.stage));
  for (const auto& ch : capture.channels) {
    out.write(reinterpret_cast<const char*>(ch.data()),
              static_cast<std::streamsize>(ch.size() * sizeof(double)));
  }
  if (!out) throw IoError("failed writing capture file '" + path + "'");
}

MicCapture load_capture(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open capture file '" + path + "'");
  char magic[sizeof(kCaptureMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCaptureMagic, sizeof(magic)) != 0) {
    throw IoError("'" + path + "' is not an acmap capture file");
  }
  MicCapture capture;
  const auto channels = read_le<std::uint32_t>(in);
  const auto samples = read_le<std::uint64_t>(in);
  capture.sampling_rate = read_le<double>(in);
  const auto stage = read_le<std::uint32_t>(in);
  if (!in || stage > static_cast<std::uint32_t>(CaptureStage::kPostFir)) {
    throw IoError("truncated or corrupt header in '" + path + "'");
  }
  capture.stage = static_cast<CaptureStage>(stage);
  capture.channels.assign(channels, std::vector<double>(samples));
  for (auto& ch : capture.channels) {
    in.read(reinterpret_cast<char*>(ch.data()),
            static_cast<std::streamsize>(samples * sizeof(double)));
  }
  if (!in) throw IoError("truncated capture file '" + path + "'");
  capture.validate();
  return capture;
}

void FilterChainConfig::validate() const {
  if (!(fs_in > 0.0) || cic_order < 1 || cic_decimation < 1 || fir_order < 1 ||
      fir_decimation < 1) {
    throw ParameterError("filter chain parameters must all be positive");
  }
}

MicCapture synthesize_points(const std::vector<PointSource>& sources,
                             const MicrophoneArray& array, double start_time,
                             double end_time, double sampling_rate,
                             double speed_of_sound) {
  if (sources.empty()) throw ParameterError("nothing to synthesize");
  if (!(speed_of_sound > 0.0)) {
    throw ParameterError("speed of sound must be positive");
  }
  if (!(end_time > start_time)) {
    throw ParameterError("synthesis window is empty");
  }
  for (const PointSource& s : sources) {
    if (!(sampling_rate > 2.0 * s.frequency_hz)) {
      throw ParameterError("sampling rate " + std::to_string(sampling_rate) +
                           " Hz undersamples a " +
                           std::to_string(s.frequency_hz) + " Hz source");
    }
  }
  MicCapture capture;
  capture.sampling_rate = sampling_rate;
  capture.stage = CaptureStage::kRawPcm;
  const std::size_t n = sample_count(start_time, end_time, sampling_rate);
  capture.channels.assign(array.size(), std::vector<double>(n, 0.0));
  for (std::size_t m = 0; m < array.size(); ++m) {
    std::vector<double>& ch = capture.channels[m];
    for (const PointSource& s : sources) {
      const double tau = norm(s.position - array[m].position) / speed_of_sound;
      const double w = kTwoPi * s.frequency_hz;
      for (std::size_t k = 0; k < n; ++k) {
        const double t = start_time + static_cast<double>(k) / sampling_rate;
        ch[k] += s.amplitude * std::sin(w * (t - tau) + s.phase_rad);
      }
    }
  }
  return capture;
}

MicCapture synthesize_scene(const Scene& scene, const MicrophoneArray& array,
                            double sampling_rate, double speed_of_sound) {
  scene.validate();
  std::vector<PointSource> points;
  for (const SoundSource& s : scene.sources) {
    points.push_back({s.position(), s.frequency_hz, s.amplitude, s.phase_rad});
  }
  return synthesize_points(points, array, scene.start_time, scene.end_time,
                           sampling_rate, speed_of_sound);
}

MicCapture sigma_delta_modulate(const MicCapture& capture) {
  MicCapture out =
      with_channels_like(capture, capture.sampling_rate, CaptureStage::kPdm);
  for (std::size_t m = 0; m < capture.channel_count(); ++m) {
    const auto& in = capture.channels[m];
    auto& bits = out.channels[m];
    bits.resize(in.size());
    double error = 0.0;
    for (std::size_t k = 0; k < in.size(); ++k) {
      if (!(std::abs(in[k]) <= 1.0)) {
        throw ParameterError("sigma-delta input exceeds [-1, 1] on channel " +
                             std::to_string(m));
      }
      const double v = in[k] + error;
      bits[k] = v >= 0.0 ? 1.0 : -1.0;
      error = v - bits[k];
    }
  }
  return out;
}

MicCapture cic_decimate(const MicCapture& capture, int order, int decimation) {
  if (order < 1 || decimation < 1) {
    throw ParameterError("CIC order and decimation must be positive");
  }
  const auto d = static_cast<std::size_t>(decimation);
  if (capture.length() < d) {
    throw ParameterError("CIC input shorter than the decimation factor");
  }
  const std::size_t out_len = capture.length() / d;
  MicCapture out = with_channels_like(
      capture, capture.sampling_rate / decimation, CaptureStage::kPostCic);
  const double gain = std::pow(static_cast<double>(decimation), order);
  const auto stages = static_cast<std::size_t>(order);

  if (capture.stage == CaptureStage::kPdm) {
    // Two's-complement wrap-around in the integrators cancels in the combs
    // as long as the final value fits, which D^N bounds.
    for (std::size_t m = 0; m < capture.channel_count(); ++m) {
      const auto& in = capture.channels[m];
      auto& y = out.channels[m];
      y.resize(out_len);
      std::vector<std::uint64_t> integ(stages, 0), comb(stages, 0);
      std::size_t k = 0;
      for (std::size_t n = 0; n < out_len * d; ++n) {
        integ[0] += static_cast<std::uint64_t>(static_cast<std::int64_t>(in[n]));
        for (std::size_t s = 1; s < stages; ++s) integ[s] += integ[s - 1];
        if (n % d == d - 1) {
          std::uint64_t v = integ[stages - 1];
          for (std::size_t s = 0; s < stages; ++s) {
            const std::uint64_t diff = v - comb[s];
            comb[s] = v;
            v = diff;
          }
          y[k++] = static_cast<double>(static_cast<std::int64_t>(v)) / gain;
        }
      }
    }
    return out;
  }

  // Non-recursive form for real-valued input: N moving sums of length D.
  for (std::size_t m = 0; m < capture.channel_count(); ++m) {
    std::vector<double> cur(capture.channels[m].begin(),
                            capture.channels[m].begin() +
                                static_cast<std::ptrdiff_t>(out_len * d));
    std::vector<double> next(cur.size());
    for (std::size_t s = 0; s < stages; ++s) {
      for (std::size_t n = 0; n < cur.size(); ++n) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d && j <= n; ++j) acc += cur[n - j];
        next[n] = acc;
      }
      std::swap(cur, next);
    }
    auto& y = out.channels[m];
    y.resize(out_len);
    for (std::size_t k = 0; k < out_len; ++k) y[k] = cur[k * d + d - 1] / gain;
  }
  return out;
}

std::vector<double> design_lowpass_fir(int order, double cutoff) {
  if (order < 1) throw ParameterError("FIR order must be positive");
  if (!(cutoff > 0.0 && cutoff < 0.5)) {
    throw ParameterError("FIR cutoff must lie in (0, 0.5) cycles/sample");
  }
  const auto taps = static_cast<std::size_t>(order) + 1;
  std::vector<double> h(taps);
  const double mid = 0.5 * order;
  double sum = 0.0;
  for (std::size_t j = 0; j < taps; ++j) {
    const double x = static_cast<double>(j) - mid;
    const double sinc = x == 0.0 ? 2.0 * cutoff
                                 : std::sin(kTwoPi * cutoff * x) /
                                       (std::numbers::pi * x);
    const double window =
        0.54 - 0.46 * std::cos(kTwoPi * static_cast<double>(j) / order);
    h[j] = sinc * window;
    sum += h[j];
  }
  for (double& v : h) v /= sum;
  return h;
}

MicCapture fir_decimate(const MicCapture& capture, int order, int decimation) {
  if (order < 1 || decimation < 1) {
    throw ParameterError("FIR order and decimation must be positive");
  }
  if (capture.length() < static_cast<std::size_t>(order) + 1) {
    throw ParameterError("FIR input shorter than order + 1 samples");
  }
  const std::vector<double> h = design_lowpass_fir(order, 0.45 / decimation);
  const auto d = static_cast<std::size_t>(decimation);
  const std::size_t out_len = capture.length() / d;
  MicCapture out = with_channels_like(
      capture, capture.sampling_rate / decimation, CaptureStage::kPostFir);
  for (std::size_t m = 0; m < capture.channel_count(); ++m) {
    const auto& x = capture.channels[m];
    auto& y = out.channels[m];
    y.resize(out_len);
    for (std::size_t k = 0; k < out_len; ++k) {
      const std::size_t n = k * d + d - 1;
      double acc = 0.0;
      for (std::size_t j = 0; j < h.size() && j <= n; ++j) acc += h[j] * x[n - j];
      y[k] = acc;
    }
  }
  return out;
}

MicCapture demodulation_chain(const MicCapture& pdm,
                              const FilterChainConfig& config) {
  config.validate();
  if (pdm.stage != CaptureStage::kPdm) {
    throw ParameterError("demodulation chain expects a PDM capture");
  }
  MicCapture cic = cic_decimate(pdm, config.cic_order, config.cic_decimation);
  return fir_decimate(cic, config.fir_order, config.fir_decimation);
}

std::string to_string(Pipeline pipeline) {
  return pipeline == Pipeline::kDirect ? "direct" : "pdm";
}

Pipeline parse_pipeline(const std::string& text) {
  if (text == "direct") return Pipeline::kDirect;
  if (text == "pdm") return Pipeline::kPdm;
  throw ParameterError("unknown pipeline '" + text + "' (direct|pdm)");
}

double AcquisitionConfig::stage_rate() const {
  const double cic_rate = chain.fs_in / chain.cic_decimation;
  return das_stage == CaptureStage::kPostCic ? cic_rate
                                             : cic_rate / chain.fir_decimation;
}

double AcquisitionConfig::beamforming_rate() const {
  if (pipeline == Pipeline::kPdm || das_rate == 0.0) return stage_rate();
  return das_rate;
}

void AcquisitionConfig::validate() const {
  chain.validate();
  if (das_stage != CaptureStage::kPostCic &&
      das_stage != CaptureStage::kPostFir) {
    throw ParameterError("das_stage must be post_cic or post_fir");
  }
  if (!(das_rate >= 0.0) || !std::isfinite(das_rate)) {
    throw ParameterError("das_rate must be non-negative");
  }
  if (!(speed_of_sound > 0.0)) {
    throw ParameterError("speed_of_sound must be positive");
  }
}

MicCapture acquire(const std::vector<PointSource>& sources,
                   const MicrophoneArray& array, double start_time,
                   double end_time, const AcquisitionConfig& config) {
  config.validate();
  if (config.pipeline == Pipeline::kDirect) {
    return synthesize_points(sources, array, start_time, end_time,
                             config.beamforming_rate(), config.speed_of_sound);
  }
  const FilterChainConfig& chain = config.chain;
  const bool fir = config.das_stage == CaptureStage::kPostFir;
  const auto total = static_cast<std::size_t>(chain.cic_decimation) *
                     static_cast<std::size_t>(fir ? chain.fir_decimation : 1);
  // Output samples disturbed by zero initial filter state.
  const std::size_t warmup =
      fir ? (static_cast<std::size_t>(chain.cic_order + chain.fir_order) + 1) /
                    static_cast<std::size_t>(chain.fir_decimation) +
                2
          : static_cast<std::size_t>(chain.cic_order) + 2;
  const double lead = static_cast<double>(warmup * total) / chain.fs_in;

  double total_amplitude = 0.0;
  std::vector<PointSource> scaled = sources;
  for (const PointSource& s : sources) total_amplitude += std::abs(s.amplitude);
  for (PointSource& s : scaled) s.amplitude *= 0.5 / total_amplitude;

  MicCapture raw = synthesize_points(scaled, array, start_time - lead,
                                     end_time, chain.fs_in,
                                     config.speed_of_sound);
  const MicCapture pdm = sigma_delta_modulate(raw);
  MicCapture pcm = fir ? demodulation_chain(pdm, chain)
                       : cic_decimate(pdm, chain.cic_order,
                                      chain.cic_decimation);
  for (auto& ch : pcm.channels) {
    ch.erase(ch.begin(),
             ch.begin() + static_cast<std::ptrdiff_t>(std::min(warmup, ch.size())));
  }
  return pcm;
}

MicCapture acquire(const Scene& scene, const MicrophoneArray& array,
                   const AcquisitionConfig& config) {
  scene.validate();
  std::vector<PointSource> points;
  for (const SoundSource& s : scene.sources) {
    points.push_back({s.position(), s.frequency_hz, s.amplitude, s.phase_rad});
  }
  return acquire(points, array, scene.start_time, scene.end_time, config);
}

}  // namespace acmap
