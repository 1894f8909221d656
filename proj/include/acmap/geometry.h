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

// Microphone array layouts, steering grids and delay-index arithmetic.

#ifndef ACMAP_GEOMETRY_H_
#define ACMAP_GEOMETRY_H_

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace acmap {

inline constexpr double kDefaultSpeedOfSound = 343.0;  // m/s

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
inline Vec3 operator*(double s, const Vec3& a) {
  return {s * a.x, s * a.y, s * a.z};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

struct Microphone {
  Vec3 position;  // meters
};

// Ordered set of microphones. The order indexes the capture channels.
class MicrophoneArray {
 public:
  // Throws ParameterError on an empty list, non-finite or duplicated
  // positions, or a position farther than `max_radius` from the origin.
  MicrophoneArray(std::string name, std::vector<Microphone> microphones,
                  double max_radius = 1.0);

  const std::string& name() const { return name_; }
  std::size_t size() const { return microphones_.size(); }
  const Microphone& operator[](std::size_t m) const { return microphones_[m]; }
  std::span<const Microphone> microphones() const { return microphones_; }

  // Largest pairwise microphone distance in meters.
  double aperture() const;
  double min_spacing() const;

 private:
  std::string name_;
  std::vector<Microphone> microphones_;
};

struct UmapLayout {
  double inner_radius = 0.0232 / std::sqrt(2.0);
  double outer_radius = 0.08128 / 2.0;
};

// 12-microphone two-ring array: 4 microphones on the inner ring at
// 45 + k*90 degrees, 8 on the outer ring at k*45 degrees, all in the z = 0
// plane. Inner indices come first.
MicrophoneArray build_umap_array(const UmapLayout& layout = {});

// Reads one microphone per line as "x,y,z" in meters. Blank lines, '#'
// comments and an optional "x,y,z" header are skipped.
MicrophoneArray load_array_file(const std::string& path);

// "umap" resolves to the built-in layout, anything else is read as a file.
MicrophoneArray array_by_name(const std::string& name_or_path);

// Unit direction vector.
class SteeringVector {
 public:
  // Normalizes `v`; throws ParameterError for a zero or non-finite vector.
  explicit SteeringVector(const Vec3& v);

  // Azimuth rotates from broadside (+z) toward +x, elevation toward +y.
  static SteeringVector from_angles(double azimuth_deg, double elevation_deg);
  // Direction in the array plane, measured from +x toward +y.
  static SteeringVector in_plane(double angle_deg);

  const Vec3& direction() const { return direction_; }
  SteeringVector operator-() const;

  friend bool operator==(const SteeringVector&,
                         const SteeringVector&) = default;

 private:
  Vec3 direction_;
};

// Uniform angular grid of steering directions, row-major with row 0 at the
// top (positive elevation) and column 0 at negative azimuth.
class SteeringGrid {
 public:
  SteeringGrid(std::size_t width, std::size_t height, double fov_azimuth_deg,
               double fov_elevation_deg);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  double fov_azimuth() const { return fov_azimuth_; }
  double fov_elevation() const { return fov_elevation_; }

  double azimuth_deg(std::size_t x) const;
  double elevation_deg(std::size_t y) const;
  const SteeringVector& at(std::size_t x, std::size_t y) const {
    return directions_[y * width_ + x];
  }
  std::span<const SteeringVector> directions() const { return directions_; }

  // Continuous pixel coordinates of an azimuth/elevation pair.
  double column_of(double azimuth_deg) const;
  double row_of(double elevation_deg) const;

 private:
  std::size_t width_;
  std::size_t height_;
  double fov_azimuth_;
  double fov_elevation_;
  std::vector<SteeringVector> directions_;
};

SteeringGrid build_steering_grid(std::size_t width, std::size_t height,
                                 double fov_azimuth_deg,
                                 double fov_elevation_deg);

// Sample-index delay fs * (r . u) / c. Throws ParameterError unless c > 0
// and fs > 0.
double delay_index(const Microphone& mic, const SteeringVector& dir,
                   double speed_of_sound, double sampling_rate);

// Rounds half away from zero.
std::int64_t round_index(double value);

// Split of a real delay into integer taps and interpolation weights.
//
// `floor_index`, `ceil_index` and `alpha` describe the exact delay. The
// `frac_*` fields hold the n-bit quantized weight and the taps it applies
// to: when round(alpha * 2^n) reaches 2^n both taps move up by one and the
// weight wraps to zero.
struct DelayDecomposition {
  double exact = 0.0;
  std::int64_t floor_index = 0;
  std::int64_t ceil_index = 0;
  double alpha = 0.0;  // in [0, 1)
  std::int64_t rounded_index = 0;
  std::int64_t frac_floor_index = 0;
  std::int64_t frac_ceil_index = 0;
  std::uint32_t alpha_frac = 0;  // in [0, 2^frac_bits)
  int frac_bits = 0;

  friend bool operator==(const DelayDecomposition&,
                         const DelayDecomposition&) = default;
};

inline constexpr int kMaxFracBits = 30;

// Throws ParameterError for frac_bits outside [0, 30] or a non-finite delay.
DelayDecomposition delay_decomposition(double exact, int frac_bits);

// Per-(direction, microphone) delay decompositions, immutable once built.
class DelayTable {
 public:
  DelayTable(const MicrophoneArray& array,
             std::span<const SteeringVector> directions, double speed_of_sound,
             double sampling_rate, int frac_bits);

  std::size_t direction_count() const { return direction_count_; }
  std::size_t microphone_count() const { return microphone_count_; }
  double sampling_rate() const { return sampling_rate_; }
  double speed_of_sound() const { return speed_of_sound_; }
  int frac_bits() const { return frac_bits_; }
  const SteeringVector& direction(std::size_t d) const {
    return directions_[d];
  }

  const DelayDecomposition& at(std::size_t direction,
                               std::size_t microphone) const {
    return entries_[direction * microphone_count_ + microphone];
  }
  std::span<const DelayDecomposition> row(std::size_t direction) const {
    return std::span<const DelayDecomposition>(entries_).subspan(
        direction * microphone_count_, microphone_count_);
  }

  // Largest |index| over every tap any delay mode can read.
  std::int64_t max_abs_index() const { return max_abs_index_; }
  double max_abs_exact() const { return max_abs_exact_; }

  friend bool operator==(const DelayTable&, const DelayTable&) = default;

 private:
  std::size_t direction_count_;
  std::size_t microphone_count_;
  double sampling_rate_;
  double speed_of_sound_;
  int frac_bits_;
  std::vector<SteeringVector> directions_;
  std::vector<DelayDecomposition> entries_;
  std::int64_t max_abs_index_ = 0;
  double max_abs_exact_ = 0.0;
};

DelayTable build_delay_table(const MicrophoneArray& array,
                             const SteeringGrid& grid, double speed_of_sound,
                             double sampling_rate, int frac_bits);

}  // namespace acmap

#endif  // ACMAP_GEOMETRY_H_
