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

// Delay-and-sum beamforming with rounded, n-bit fractional and
// double-precision delays, steered response power and derived responses.

#ifndef ACMAP_BEAMFORM_H_
#define ACMAP_BEAMFORM_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "acmap/geometry.h"
#include "acmap/synthesis.h"

namespace acmap {

class DelayMode {
 public:
  enum class Kind { kRounded, kFractional, kDouble };

  static DelayMode rounded() { return DelayMode(Kind::kRounded, 0); }
  static DelayMode fractional(int frac_bits);  // 1 <= frac_bits <= 30
  static DelayMode double_precision() { return DelayMode(Kind::kDouble, 0); }
  // Accepts "rounded", "double" and "frac:<n>".
  static DelayMode parse(const std::string& text);

  Kind kind() const { return kind_; }
  int frac_bits() const { return frac_bits_; }
  std::string to_string() const;

  friend bool operator==(const DelayMode&, const DelayMode&) = default;

 private:
  DelayMode(Kind kind, int frac_bits) : kind_(kind), frac_bits_(frac_bits) {}
  Kind kind_;
  int frac_bits_;
};

struct BeamOutput {
  std::vector<double> samples;
  SteeringVector direction;
  std::size_t first_index = 0;  // reference index i of samples[0]
};

// Reference indices [begin, end) of a beamformed segment.
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Indices i with i - w >= 0 and i + w < length, w = table.max_abs_index().
// Throws ParameterError when the capture is too short to leave any.
IndexRange valid_window(const DelayTable& table, std::size_t length);

// o[i] for one steering direction over the table's valid window.
//
//   rounded:    sum_m s_m[i - round(d_m)]
//   double:     sum_m ((1 - a) s_m[i - floor] + a s_m[i - ceil]) / 2
//   frac(n):    sum_m ((2^n - a') s_m[i - floor'] + a' s_m[i - ceil'])
//               / 2^(n+1)
//
// Throws ParameterError when the capture does not match the table (channel
// count, sampling rate, fraction bits) and WindowError naming the first
// microphone whose delayed index leaves the capture.
BeamOutput das_beamform(const MicCapture& capture, const DelayTable& table,
                        std::size_t direction, DelayMode mode);
BeamOutput das_beamform(const MicCapture& capture, const DelayTable& table,
                        std::size_t direction, DelayMode mode,
                        IndexRange range);

// Per-block mean power over consecutive blocks of `block_length` samples;
// a trailing partial block is dropped.
std::vector<double> steered_power_blocks(std::span<const double> output,
                                         std::size_t block_length);
// Mean of the block powers.
double steered_power(std::span<const double> output, std::size_t block_length);

struct SrpConfig {
  std::size_t block_length = 64;
  double speed_of_sound = kDefaultSpeedOfSound;
  unsigned jobs = 1;
};

struct SrpMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;  // row-major
  double fov_azimuth = 0.0;
  double fov_elevation = 0.0;
  DelayMode mode = DelayMode::double_precision();

  double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }
};

// Builds the delay table for `grid` at the capture's rate.
SrpMap acoustic_heatmap(const MicCapture& capture, const MicrophoneArray& array,
                        const SteeringGrid& grid, DelayMode mode,
                        const SrpConfig& config = {});
// Uses a prebuilt table whose directions are `grid`'s.
SrpMap acoustic_heatmap(const MicCapture& capture, const DelayTable& table,
                        const SteeringGrid& grid, DelayMode mode,
                        const SrpConfig& config = {});

// Acquisition settings shared by the polar and waterfall responses.
struct ResponseConfig {
  AcquisitionConfig acquisition;
  double source_distance = 1.0;
  double start_time = 0.05;
  double end_time = 0.10;
  std::size_t block_length = 64;
};

struct PolarResponse {
  std::vector<double> angles_deg;  // in-plane angle from +x toward +y
  std::vector<double> srp;         // raw steered power
  std::vector<double> normalized;  // srp / max(srp)
};

// One tone in the array plane at `source_angle_deg`, beamformed over
// [0, 360) in steps of `resolution_deg`.
PolarResponse polar_response(const MicrophoneArray& array, double frequency_hz,
                             double source_angle_deg, DelayMode mode,
                             double resolution_deg,
                             const ResponseConfig& config = {});

// Far-field array factor with ideal delays, peak-normalized. Plot reference.
PolarResponse theoretical_polar_response(const MicrophoneArray& array,
                                         double frequency_hz,
                                         double source_angle_deg,
                                         double resolution_deg,
                                         double speed_of_sound =
                                             kDefaultSpeedOfSound);

struct Waterfall {
  std::vector<double> frequencies_hz;
  std::vector<double> angles_deg;
  std::vector<std::vector<double>> rows;  // one normalized response per freq
};

Waterfall waterfall_response(const MicrophoneArray& array, double freq_min,
                             double freq_max, double freq_step,
                             double source_angle_deg, DelayMode mode,
                             double resolution_deg,
                             const ResponseConfig& config = {});

// Mean |a - b| over every cell; throws ParameterError on shape mismatch.
double mean_abs_difference(const Waterfall& a, const Waterfall& b);

void write_polar_csv(const PolarResponse& response, const std::string& path);
void write_waterfall_csv(const Waterfall& waterfall, const std::string& path);

}  // namespace acmap

#endif  // ACMAP_BEAMFORM_H_
