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

#include "acmap/beamform.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <thread>

#include "acmap/errors.h"

namespace acmap {
namespace {

void check_compatible(const MicCapture& capture, const DelayTable& table,
                      DelayMode mode) {
  if (capture.channel_count() != table.microphone_count()) {
    throw ParameterError("capture has " +
                         std::to_string(capture.channel_count()) +
                         " channels but the delay table expects " +
                         std::to_string(table.microphone_count()));
  }
  if (capture.sampling_rate != table.sampling_rate()) {
    throw ParameterError("capture rate " +
                         std::to_string(capture.sampling_rate) +
                         " Hz differs from the delay table rate " +
                         std::to_string(table.sampling_rate()) + " Hz");
  }
  if (capture.stage == CaptureStage::kPdm) {
    throw ParameterError("beamforming expects PCM, not a PDM capture");
  }
  if (mode.kind() == DelayMode::Kind::kFractional &&
      mode.frac_bits() != table.frac_bits()) {
    throw ParameterError("delay table was built for " +
                         std::to_string(table.frac_bits()) +
                         " fraction bits, mode asks for " +
                         std::to_string(mode.frac_bits()));
  }
}

// Taps read by `mode` for one decomposition.
std::pair<std::int64_t, std::int64_t> taps(const DelayDecomposition& d,
                                           DelayMode mode) {
  switch (mode.kind()) {
    case DelayMode::Kind::kRounded:
      return {d.rounded_index, d.rounded_index};
    case DelayMode::Kind::kFractional:
      return {d.frac_floor_index, d.frac_ceil_index};
    case DelayMode::Kind::kDouble:
      break;
  }
  return {d.floor_index, d.ceil_index};
}

// Writes o[range.begin + k] into out[k]; bounds are the caller's job.
void beamform_into(const MicCapture& capture,
                   std::span<const DelayDecomposition> row, DelayMode mode,
                   IndexRange range, std::span<double> out) {
  const std::size_t count = range.end - range.begin;
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(count), 0.0);
  const auto base = static_cast<std::ptrdiff_t>(range.begin);
  for (std::size_t m = 0; m < row.size(); ++m) {
    const DelayDecomposition& d = row[m];
    const double* ch = capture.channels[m].data();
    switch (mode.kind()) {
      case DelayMode::Kind::kRounded: {
        const double* s = ch + base - d.rounded_index;
        for (std::size_t k = 0; k < count; ++k) out[k] += s[k];
        break;
      }
      case DelayMode::Kind::kDouble: {
        const double* sf = ch + base - d.floor_index;
        const double* sc = ch + base - d.ceil_index;
        const double wf = 1.0 - d.alpha;
        const double wc = d.alpha;
        for (std::size_t k = 0; k < count; ++k) out[k] += wf * sf[k] + wc * sc[k];
        break;
      }
      case DelayMode::Kind::kFractional: {
        const double* sf = ch + base - d.frac_floor_index;
        const double* sc = ch + base - d.frac_ceil_index;
        const double wc = static_cast<double>(d.alpha_frac);
        const double wf = std::ldexp(1.0, mode.frac_bits()) - wc;
        for (std::size_t k = 0; k < count; ++k) out[k] += wf * sf[k] + wc * sc[k];
        break;
      }
    }
  }
  switch (mode.kind()) {
    case DelayMode::Kind::kRounded:
      break;
    case DelayMode::Kind::kDouble:
      for (std::size_t k = 0; k < count; ++k) out[k] *= 0.5;
      break;
    case DelayMode::Kind::kFractional: {
      // Power-of-two denominator: a pure exponent shift.
      const int shift = -(mode.frac_bits() + 1);
      for (std::size_t k = 0; k < count; ++k) out[k] = std::ldexp(out[k], shift);
      break;
    }
  }
}

int table_bits(DelayMode mode) {
  return mode.kind() == DelayMode::Kind::kFractional ? mode.frac_bits() : 0;
}

}  // namespace

DelayMode DelayMode::fractional(int frac_bits) {
  if (frac_bits < 1 || frac_bits > kMaxFracBits) {
    throw ParameterError("fractional delays need 1..30 bits, got " +
                         std::to_string(frac_bits));
  }
  return DelayMode(Kind::kFractional, frac_bits);
}

DelayMode DelayMode::parse(const std::string& text) {
  if (text == "rounded") return rounded();
  if (text == "double") return double_precision();
  if (text.rfind("frac:", 0) == 0) {
    const std::string bits = text.substr(5);
    int n = 0;
    try {
      std::size_t used = 0;
      n = std::stoi(bits, &used);
      if (used != bits.size()) throw std::invalid_argument(bits);
    } catch (const std::exception&) {
      throw ParameterError("bad fraction bit count in '" + text + "'");
    }
    return fractional(n);
  }
  throw ParameterError("unknown delay mode '" + text +
                       "' (rounded|frac:<n>|double)");
}

std::string DelayMode::to_string() const {
  switch (kind_) {
    case Kind::kRounded:
      return "rounded";
    case Kind::kFractional:
      return "frac:" + std::to_string(frac_bits_);
    case Kind::kDouble:
      break;
  }
  return "double";
}

IndexRange valid_window(const DelayTable& table, std::size_t length) {
  const auto w = static_cast<std::size_t>(table.max_abs_index());
  if (length <= 2 * w) {
    throw ParameterError("capture of " + std::to_string(length) +
                         " samples is too short for delays up to " +
                         std::to_string(w) + " samples");
  }
  return {w, length - w};
}

BeamOutput das_beamform(const MicCapture& capture, const DelayTable& table,
                        std::size_t direction, DelayMode mode) {
  return das_beamform(capture, table, direction, mode,
                      valid_window(table, capture.length()));
}

BeamOutput das_beamform(const MicCapture& capture, const DelayTable& table,
                        std::size_t direction, DelayMode mode,
                        IndexRange range) {
  check_compatible(capture, table, mode);
  if (direction >= table.direction_count()) {
    throw ParameterError("steering direction index out of range");
  }
  if (range.end < range.begin) throw ParameterError("inverted index range");
  const auto row = table.row(direction);
  const auto len = static_cast<std::int64_t>(capture.length());
  for (std::size_t m = 0; m < row.size(); ++m) {
    const auto [lo_tap, hi_tap] = taps(row[m], mode);
    const std::int64_t lo = static_cast<std::int64_t>(range.begin) -
                            std::max(lo_tap, hi_tap);
    const std::int64_t hi = static_cast<std::int64_t>(range.end) - 1 -
                            std::min(lo_tap, hi_tap);
    if (range.end > range.begin && (lo < 0 || hi >= len)) {
      throw WindowError("delayed index for microphone " + std::to_string(m) +
                            " leaves the capture [0, " + std::to_string(len) +
                            ")",
                        m);
    }
  }
  BeamOutput out{std::vector<double>(range.end - range.begin),
                 table.direction(direction), range.begin};
  beamform_into(capture, row, mode, range, out.samples);
  return out;
}

std::vector<double> steered_power_blocks(std::span<const double> output,
                                         std::size_t block_length) {
  if (block_length == 0) throw ParameterError("SRP block length must be >= 1");
  if (output.size() < block_length) {
    throw ParameterError("beam output of " + std::to_string(output.size()) +
                         " samples is shorter than the SRP length " +
                         std::to_string(block_length));
  }
  std::vector<double> blocks(output.size() / block_length);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < block_length; ++k) {
      const double v = output[b * block_length + k];
      acc += v * v;
    }
    blocks[b] = acc / static_cast<double>(block_length);
  }
  return blocks;
}

double steered_power(std::span<const double> output, std::size_t block_length) {
  const std::vector<double> blocks = steered_power_blocks(output, block_length);
  double acc = 0.0;
  for (double p : blocks) acc += p;
  return acc / static_cast<double>(blocks.size());
}

SrpMap acoustic_heatmap(const MicCapture& capture, const MicrophoneArray& array,
                        const SteeringGrid& grid, DelayMode mode,
                        const SrpConfig& config) {
  const DelayTable table =
      build_delay_table(array, grid, config.speed_of_sound,
                        capture.sampling_rate, table_bits(mode));
  return acoustic_heatmap(capture, table, grid, mode, config);
}

SrpMap acoustic_heatmap(const MicCapture& capture, const DelayTable& table,
                        const SteeringGrid& grid, DelayMode mode,
                        const SrpConfig& config) {
  check_compatible(capture, table, mode);
  if (table.direction_count() != grid.width() * grid.height()) {
    throw ParameterError("delay table does not match the steering grid");
  }
  const IndexRange range = valid_window(table, capture.length());
  if (range.end - range.begin < config.block_length) {
    throw ParameterError("valid beamforming window is shorter than one block");
  }

  SrpMap map;
  map.width = grid.width();
  map.height = grid.height();
  map.fov_azimuth = grid.fov_azimuth();
  map.fov_elevation = grid.fov_elevation();
  map.mode = mode;
  map.values.assign(map.width * map.height, 0.0);

  std::atomic<std::size_t> next_row{0};
  auto worker = [&] {
    std::vector<double> buffer(range.end - range.begin);
    for (std::size_t y = next_row++; y < map.height; y = next_row++) {
      for (std::size_t x = 0; x < map.width; ++x) {
        const std::size_t dir = y * map.width + x;
        beamform_into(capture, table.row(dir), mode, range, buffer);
        map.values[dir] = steered_power(buffer, config.block_length);
      }
    }
  };
  const unsigned jobs = std::max(1u, config.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  return map;
}

namespace {

std::vector<double> angle_sweep(double resolution_deg) {
  if (!(resolution_deg > 0.0 && resolution_deg <= 360.0)) {
    throw ParameterError("angular resolution must lie in (0, 360] degrees");
  }
  const auto n = static_cast<std::size_t>(std::ceil(360.0 / resolution_deg - 1e-9));
  std::vector<double> angles(n);
  for (std::size_t k = 0; k < n; ++k) {
    angles[k] = static_cast<double>(k) * resolution_deg;
  }
  return angles;
}

void normalize_peak(PolarResponse& r) {
  const double peak = *std::max_element(r.srp.begin(), r.srp.end());
  r.normalized.resize(r.srp.size());
  for (std::size_t k = 0; k < r.srp.size(); ++k) {
    r.normalized[k] = peak > 0.0 ? r.srp[k] / peak : 0.0;
  }
}

}  // namespace

PolarResponse polar_response(const MicrophoneArray& array, double frequency_hz,
                             double source_angle_deg, DelayMode mode,
                             double resolution_deg,
                             const ResponseConfig& config) {
  PolarResponse r;
  r.angles_deg = angle_sweep(resolution_deg);
  const PointSource source{
      config.source_distance *
          SteeringVector::in_plane(source_angle_deg).direction(),
      frequency_hz, 1.0, 0.0};
  const MicCapture capture = acquire({source}, array, config.start_time,
                                     config.end_time, config.acquisition);
  std::vector<SteeringVector> dirs;
  dirs.reserve(r.angles_deg.size());
  for (double a : r.angles_deg) dirs.push_back(SteeringVector::in_plane(a));
  const DelayTable table(array, dirs, config.acquisition.speed_of_sound,
                         capture.sampling_rate, table_bits(mode));
  const IndexRange range = valid_window(table, capture.length());
  std::vector<double> buffer(range.end - range.begin);
  r.srp.resize(dirs.size());
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    beamform_into(capture, table.row(d), mode, range, buffer);
    r.srp[d] = steered_power(buffer, config.block_length);
  }
  normalize_peak(r);
  return r;
}

PolarResponse theoretical_polar_response(const MicrophoneArray& array,
                                         double frequency_hz,
                                         double source_angle_deg,
                                         double resolution_deg,
                                         double speed_of_sound) {
  PolarResponse r;
  r.angles_deg = angle_sweep(resolution_deg);
  const double w = 2.0 * std::numbers::pi * frequency_hz / speed_of_sound;
  const Vec3 src = SteeringVector::in_plane(source_angle_deg).direction();
  r.srp.resize(r.angles_deg.size());
  for (std::size_t k = 0; k < r.angles_deg.size(); ++k) {
    const Vec3 u = SteeringVector::in_plane(r.angles_deg[k]).direction();
    std::complex<double> sum = 0.0;
    for (const Microphone& mic : array.microphones()) {
      sum += std::polar(1.0, w * (dot(mic.position, src) - dot(mic.position, u)));
    }
    r.srp[k] = std::norm(sum);
  }
  normalize_peak(r);
  return r;
}

Waterfall waterfall_response(const MicrophoneArray& array, double freq_min,
                             double freq_max, double freq_step,
                             double source_angle_deg, DelayMode mode,
                             double resolution_deg,
                             const ResponseConfig& config) {
  if (!(freq_step > 0.0) || !(freq_min > 0.0) || !(freq_max >= freq_min)) {
    throw ParameterError("waterfall needs 0 < freq_min <= freq_max, step > 0");
  }
  if (!(freq_max < 0.5 * config.acquisition.beamforming_rate())) {
    throw ParameterError("waterfall range reaches the beamforming Nyquist rate");
  }
  Waterfall wf;
  const auto rows = static_cast<std::size_t>(
                        std::floor((freq_max - freq_min) / freq_step + 1e-9)) +
                    1;
  for (std::size_t k = 0; k < rows; ++k) {
    const double f = freq_min + static_cast<double>(k) * freq_step;
    PolarResponse r =
        polar_response(array, f, source_angle_deg, mode, resolution_deg, config);
    if (wf.angles_deg.empty()) wf.angles_deg = r.angles_deg;
    wf.frequencies_hz.push_back(f);
    wf.rows.push_back(std::move(r.normalized));
  }
  return wf;
}

double mean_abs_difference(const Waterfall& a, const Waterfall& b) {
  if (a.rows.size() != b.rows.size() || a.angles_deg != b.angles_deg) {
    throw ParameterError("waterfall shapes differ");
  }
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    for (std::size_t c = 0; c < a.rows[r].size(); ++c) {
      acc += std::abs(a.rows[r][c] - b.rows[r][c]);
      ++n;
    }
  }
  return n ? acc / static_cast<double>(n) : 0.0;
}

void write_polar_csv(const PolarResponse& response, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "angle_deg,response\n" << std::setprecision(17);
  for (std::size_t k = 0; k < response.angles_deg.size(); ++k) {
    out << response.angles_deg[k] << ',' << response.normalized[k] << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

void write_waterfall_csv(const Waterfall& waterfall, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "frequency_hz,angle_deg,response\n" << std::setprecision(17);
  for (std::size_t r = 0; r < waterfall.rows.size(); ++r) {
    for (std::size_t c = 0; c < waterfall.angles_deg.size(); ++c) {
      out << waterfall.frequencies_hz[r] << ',' << waterfall.angles_deg[c] << ','
          << waterfall.rows[r][c] << '\n';
    }
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace acmap
