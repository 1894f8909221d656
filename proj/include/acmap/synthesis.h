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

// Scene synthesis, sigma-delta modulation and the CIC + FIR demodulation
// chain that turns one-bit PDM streams back into PCM.

#ifndef ACMAP_SYNTHESIS_H_
#define ACMAP_SYNTHESIS_H_

#include <cstddef>
#include <string>
#include <vector>

#include "acmap/geometry.h"

namespace acmap {

struct SoundSource {
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  double distance_m = 1.0;
  double frequency_hz = 1000.0;
  double amplitude = 1.0;
  double phase_rad = 0.0;

  // Position in meters, using the steering-grid angle convention.
  Vec3 position() const;
};

struct Scene {
  std::vector<SoundSource> sources;
  double start_time = 0.05;  // s
  double end_time = 0.10;    // s

  void validate() const;
};

// Versioned JSON scene file ("acmap-scene", version 1).
Scene load_scene(const std::string& path);
void save_scene(const Scene& scene, const std::string& path);

// Tone emitted from an explicit point.
struct PointSource {
  Vec3 position;
  double frequency_hz = 1000.0;
  double amplitude = 1.0;
  double phase_rad = 0.0;
};

enum class CaptureStage { kRawPcm, kPdm, kPostCic, kPostFir };

std::string to_string(CaptureStage stage);
CaptureStage parse_capture_stage(const std::string& text);

struct MicCapture {
  double sampling_rate = 0.0;
  CaptureStage stage = CaptureStage::kRawPcm;
  std::vector<std::vector<double>> channels;

  std::size_t channel_count() const { return channels.size(); }
  std::size_t length() const {
    return channels.empty() ? 0 : channels.front().size();
  }
  // Throws ParameterError when channels have unequal lengths or a PDM
  // capture holds values other than -1 and +1.
  void validate() const;
};

// Binary capture file: "ACMCAP01", u32 channels, u64 samples, f64 rate,
// u32 stage, then channel-major little-endian f64 samples.
void save_capture(const MicCapture& capture, const std::string& path);
MicCapture load_capture(const std::string& path);

struct FilterChainConfig {
  double fs_in = 3125000.0;
  int cic_order = 4;
  int cic_decimation = 24;
  int fir_order = 23;
  int fir_decimation = 4;

  double output_rate() const {
    return fs_in / (static_cast<double>(cic_decimation) * fir_decimation);
  }
  void validate() const;
};

// Samples every tone over [start_time, end_time) at `sampling_rate`, with
// exact spherical time of flight to each microphone and no attenuation.
MicCapture synthesize_points(const std::vector<PointSource>& sources,
                             const MicrophoneArray& array, double start_time,
                             double end_time, double sampling_rate,
                             double speed_of_sound);

MicCapture synthesize_scene(const Scene& scene, const MicrophoneArray& array,
                            double sampling_rate, double speed_of_sound);

// First-order sigma-delta modulator, one per channel.
MicCapture sigma_delta_modulate(const MicCapture& capture);

// N integrators, decimation by D, N combs; gain normalized by D^N. Output
// sample k covers input samples up to k*D + D - 1. PDM input runs through
// exact integer accumulators.
MicCapture cic_decimate(const MicCapture& capture, int order, int decimation);

// Hamming-windowed sinc low-pass with order + 1 taps and unity DC gain.
// `cutoff` is in cycles per input sample.
std::vector<double> design_lowpass_fir(int order, double cutoff);

// Low-pass at 0.9 x output Nyquist, then keep every D-th sample.
MicCapture fir_decimate(const MicCapture& capture, int order, int decimation);

MicCapture demodulation_chain(const MicCapture& pdm,
                              const FilterChainConfig& config);

enum class Pipeline {
  kDirect,  // synthesize PCM at the beamforming rate
  kPdm,     // synthesize at fs_in, modulate, run the filter chain
};

std::string to_string(Pipeline pipeline);
Pipeline parse_pipeline(const std::string& text);

struct AcquisitionConfig {
  Pipeline pipeline = Pipeline::kDirect;
  FilterChainConfig chain;
  // Chain stage feeding the beamformer: kPostCic (fs_in / D_cic) or
  // kPostFir (fs_in / D_cic / D_fir).
  CaptureStage das_stage = CaptureStage::kPostCic;
  // Direct-pipeline rate override in Hz; 0 selects the das_stage rate.
  double das_rate = 0.0;
  double speed_of_sound = kDefaultSpeedOfSound;

  double stage_rate() const;
  double beamforming_rate() const;
  void validate() const;
};

// Produces the PCM capture the beamformer consumes. The PDM pipeline starts
// early enough that filter warm-up is discarded, and scales the field into
// the modulator's [-1, 1] input range.
MicCapture acquire(const std::vector<PointSource>& sources,
                   const MicrophoneArray& array, double start_time,
                   double end_time, const AcquisitionConfig& config);
MicCapture acquire(const Scene& scene, const MicrophoneArray& array,
                   const AcquisitionConfig& config);

}  // namespace acmap

#endif  // ACMAP_SYNTHESIS_H_
