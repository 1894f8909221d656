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

#include "acmap/geometry.h"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "acmap/errors.h"

namespace acmap {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

bool finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

// sin() of a negated argument is computed as the negated sin() of the
// magnitude so that mirrored grid columns are bit-exact mirror images.
double odd_sin(double rad) {
  return rad < 0.0 ? -std::sin(-rad) : std::sin(rad);
}

}  // namespace

MicrophoneArray::MicrophoneArray(std::string name,
                                 std::vector<Microphone> microphones,
                                 double max_radius)
    : name_(std::move(name)), microphones_(std::move(microphones)) {
  if (microphones_.empty()) {
    throw ParameterError("microphone array '" + name_ + "' is empty");
  }
  for (std::size_t m = 0; m < microphones_.size(); ++m) {
    const Vec3& p = microphones_[m].position;
    if (!finite(p)) {
      throw ParameterError("microphone " + std::to_string(m) +
                           " has a non-finite position");
    }
    if (norm(p) >= max_radius) {
      throw ParameterError("microphone " + std::to_string(m) +
                           " lies outside the array radius bound");
    }
    for (std::size_t k = 0; k < m; ++k) {
      if (microphones_[k].position == p) {
        throw ParameterError("microphones " + std::to_string(k) + " and " +
                             std::to_string(m) + " share a position");
      }
    }
  }
}

double MicrophoneArray::aperture() const {
  double best = 0.0;
  for (std::size_t i = 0; i < microphones_.size(); ++i) {
    for (std::size_t j = i + 1; j < microphones_.size(); ++j) {
      best = std::max(best,
                      norm(microphones_[i].position - microphones_[j].position));
    }
  }
  return best;
}

double MicrophoneArray::min_spacing() const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < microphones_.size(); ++i) {
    for (std::size_t j = i + 1; j < microphones_.size(); ++j) {
      best = std::min(best,
                      norm(microphones_[i].position - microphones_[j].position));
    }
  }
  return best;
}

MicrophoneArray build_umap_array(const UmapLayout& layout) {
  if (!(layout.inner_radius > 0.0) ||
      !(layout.outer_radius > layout.inner_radius)) {
    throw ParameterError("UMAP radii must satisfy 0 < inner < outer");
  }
  const double diag = std::sqrt(0.5);
  const double a = layout.inner_radius * diag;
  const double r = layout.outer_radius;
  const double c = r * diag;
  std::vector<Microphone> mics = {
      // inner ring, 45 + k * 90 degrees
      {{a, a, 0.0}},
      {{-a, a, 0.0}},
      {{-a, -a, 0.0}},
      {{a, -a, 0.0}},
      // outer ring, k * 45 degrees
      {{r, 0.0, 0.0}},
      {{c, c, 0.0}},
      {{0.0, r, 0.0}},
      {{-c, c, 0.0}},
      {{-r, 0.0, 0.0}},
      {{-c, -c, 0.0}},
      {{0.0, -r, 0.0}},
      {{c, -c, 0.0}},
  };
  return MicrophoneArray("umap", std::move(mics));
}

MicrophoneArray load_array_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open array file '" + path + "'");
  std::vector<Microphone> mics;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;
    if (first == "x") continue;  // header
    Vec3 p;
    try {
      std::size_t used = 0;
      p.x = std::stod(first, &used);
      if (used != first.size()) throw std::invalid_argument(first);
    } catch (const std::exception&) {
      throw ParameterError(path + ":" + std::to_string(line_no) +
                           ": expected x,y,z in meters");
    }
    std::string rest;
    if (!(fields >> p.y >> p.z) || (fields >> rest)) {
      throw ParameterError(path + ":" + std::to_string(line_no) +
                           ": expected x,y,z in meters");
    }
    mics.push_back({p});
  }
  return MicrophoneArray(path, std::move(mics));
}

MicrophoneArray array_by_name(const std::string& name_or_path) {
  if (name_or_path == "umap") return build_umap_array();
  return load_array_file(name_or_path);
}

SteeringVector::SteeringVector(const Vec3& v) {
  const double n = norm(v);
  if (!std::isfinite(n) || n == 0.0) {
    throw ParameterError("steering vector must be finite and non-zero");
  }
  direction_ = {v.x / n, v.y / n, v.z / n};
}

SteeringVector SteeringVector::from_angles(double azimuth_deg,
                                           double elevation_deg) {
  const double az = azimuth_deg * kDegToRad;
  const double el = elevation_deg * kDegToRad;
  const double ce = std::cos(el);
  return SteeringVector(Vec3{odd_sin(az) * ce, odd_sin(el), std::cos(az) * ce});
}

SteeringVector SteeringVector::in_plane(double angle_deg) {
  const double t = angle_deg * kDegToRad;
  return SteeringVector(Vec3{std::cos(t), std::sin(t), 0.0});
}

SteeringVector SteeringVector::operator-() const {
  return SteeringVector(Vec3{-direction_.x, -direction_.y, -direction_.z});
}

SteeringGrid::SteeringGrid(std::size_t width, std::size_t height,
                           double fov_azimuth_deg, double fov_elevation_deg)
    : width_(width),
      height_(height),
      fov_azimuth_(fov_azimuth_deg),
      fov_elevation_(fov_elevation_deg) {
  if (width == 0 || height == 0) {
    throw ParameterError("steering grid needs at least one pixel per axis");
  }
  if (!(fov_azimuth_deg > 0.0 && fov_azimuth_deg <= 180.0) ||
      !(fov_elevation_deg > 0.0 && fov_elevation_deg <= 180.0)) {
    throw ParameterError("field of view must lie in (0, 180] degrees");
  }
  directions_.reserve(width * height);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      directions_.push_back(
          SteeringVector::from_angles(azimuth_deg(x), elevation_deg(y)));
    }
  }
}

double SteeringGrid::azimuth_deg(std::size_t x) const {
  if (width_ == 1) return 0.0;
  const double center = 0.5 * static_cast<double>(width_ - 1);
  const double step = fov_azimuth_ / static_cast<double>(width_ - 1);
  return (static_cast<double>(x) - center) * step;
}

double SteeringGrid::elevation_deg(std::size_t y) const {
  if (height_ == 1) return 0.0;
  const double center = 0.5 * static_cast<double>(height_ - 1);
  const double step = fov_elevation_ / static_cast<double>(height_ - 1);
  return (center - static_cast<double>(y)) * step;
}

double SteeringGrid::column_of(double azimuth_deg) const {
  const double center = 0.5 * static_cast<double>(width_ - 1);
  if (width_ == 1) return center;
  return center + azimuth_deg * static_cast<double>(width_ - 1) / fov_azimuth_;
}

double SteeringGrid::row_of(double elevation_deg) const {
  const double center = 0.5 * static_cast<double>(height_ - 1);
  if (height_ == 1) return center;
  return center -
         elevation_deg * static_cast<double>(height_ - 1) / fov_elevation_;
}

SteeringGrid build_steering_grid(std::size_t width, std::size_t height,
                                 double fov_azimuth_deg,
                                 double fov_elevation_deg) {
  return SteeringGrid(width, height, fov_azimuth_deg, fov_elevation_deg);
}

double delay_index(const Microphone& mic, const SteeringVector& dir,
                   double speed_of_sound, double sampling_rate) {
  if (!(speed_of_sound > 0.0)) {
    throw ParameterError("speed of sound must be positive");
  }
  if (!(sampling_rate > 0.0)) {
    throw ParameterError("sampling rate must be positive");
  }
  return sampling_rate * dot(mic.position, dir.direction()) / speed_of_sound;
}

std::int64_t round_index(double value) {
  return static_cast<std::int64_t>(std::llround(value));
}

DelayDecomposition delay_decomposition(double exact, int frac_bits) {
  if (frac_bits < 0 || frac_bits > kMaxFracBits) {
    throw ParameterError("fraction bit count must lie in [0, 30]");
  }
  if (!std::isfinite(exact)) throw ParameterError("delay must be finite");

  DelayDecomposition d;
  d.exact = exact;
  d.frac_bits = frac_bits;
  const double fl = std::floor(exact);
  d.floor_index = static_cast<std::int64_t>(fl);
  d.ceil_index = static_cast<std::int64_t>(std::ceil(exact));
  d.alpha = exact - fl;
  // exact - floor can round up to 1.0 for tiny negative delays.
  if (d.alpha >= 1.0) d.alpha = std::nextafter(1.0, 0.0);
  d.rounded_index = round_index(exact);

  const double scale = std::ldexp(1.0, frac_bits);
  auto q = static_cast<std::uint64_t>(std::llround(d.alpha * scale));
  d.frac_floor_index = d.floor_index;
  d.frac_ceil_index = d.floor_index + (d.ceil_index > d.floor_index ? 1 : 0);
  if (q == (std::uint64_t{1} << frac_bits)) {
    d.frac_floor_index = d.floor_index + 1;
    d.frac_ceil_index = d.floor_index + 2;
    q = 0;
  }
  d.alpha_frac = static_cast<std::uint32_t>(q);
  return d;
}

DelayTable::DelayTable(const MicrophoneArray& array,
                       std::span<const SteeringVector> directions,
                       double speed_of_sound, double sampling_rate,
                       int frac_bits)
    : direction_count_(directions.size()),
      microphone_count_(array.size()),
      sampling_rate_(sampling_rate),
      speed_of_sound_(speed_of_sound),
      frac_bits_(frac_bits),
      directions_(directions.begin(), directions.end()) {
  entries_.reserve(direction_count_ * microphone_count_);
  for (const SteeringVector& dir : directions) {
    for (const Microphone& mic : array.microphones()) {
      DelayDecomposition d = delay_decomposition(
          delay_index(mic, dir, speed_of_sound, sampling_rate), frac_bits);
      for (std::int64_t idx : {d.floor_index, d.ceil_index, d.rounded_index,
                               d.frac_floor_index, d.frac_ceil_index}) {
        max_abs_index_ = std::max(max_abs_index_, idx < 0 ? -idx : idx);
      }
      max_abs_exact_ = std::max(max_abs_exact_, std::abs(d.exact));
      entries_.push_back(d);
    }
  }
}

DelayTable build_delay_table(const MicrophoneArray& array,
                             const SteeringGrid& grid, double speed_of_sound,
                             double sampling_rate, int frac_bits) {
  return DelayTable(array, grid.directions(), speed_of_sound, sampling_rate,
                    frac_bits);
}

}  // namespace acmap
