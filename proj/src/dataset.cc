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

#include "acmap/dataset.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <thread>

#include "acmap/errors.h"
#include "acmap/geometry.h"
#include "acmap/imaging.h"
#include "json.hpp"

namespace acmap {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Inclusive arithmetic grid start, start + step, ... <= end, tolerant to
// accumulated rounding at the end point.
std::vector<double> arithmetic_grid(double start, double end, double step) {
  std::vector<double> out;
  const double span = (end - start) / step;
  const auto n = static_cast<std::int64_t>(std::floor(span + 1e-9));
  for (std::int64_t k = 0; k <= n; ++k) {
    out.push_back(start + static_cast<double>(k) * step);
  }
  return out;
}

std::string join_modes(const std::vector<DelayMode>& modes) {
  std::string out;
  for (const DelayMode& m : modes) {
    if (!out.empty()) out += ",";
    out += m.to_string();
  }
  return out;
}

std::string join_resolutions(const std::vector<Resolution>& res) {
  std::string out;
  for (const Resolution& r : res) {
    if (!out.empty()) out += ",";
    out += r.to_string();
  }
  return out;
}

std::string mode_directory(DelayMode mode) {
  if (mode.kind() == DelayMode::Kind::kFractional) {
    return "frac" + std::to_string(mode.frac_bits());
  }
  return mode.to_string();
}

std::size_t count_positive(const std::string& key, const std::string& value) {
  const std::int64_t v = parse_int(key, value);
  if (v < 0) throw ParameterError(key + ": must be non-negative");
  return static_cast<std::size_t>(v);
}

int table_bits(DelayMode mode) {
  return mode.kind() == DelayMode::Kind::kFractional ? mode.frac_bits() : 0;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Linear-interpolation quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Resolution divided(Resolution hr, int scale) {
  if (scale < 1 || hr.width % scale != 0 || hr.height % scale != 0) {
    throw ParameterError("resolution " + hr.to_string() +
                         " is not divisible by " + std::to_string(scale));
  }
  return {hr.width / scale, hr.height / scale};
}

}  // namespace

const std::vector<std::string>& DatasetConfig::keys() {
  static const std::vector<std::string> kKeys = {
      "set_name",       "array",          "angle_start",     "angle_end",
      "angle_step",     "freq_start",     "freq_end",        "freq_step",
      "resolutions",    "delay_modes",    "hr_mode",         "lr_mode",
      "fov_azimuth",    "fov_elevation",  "source_distance", "source_amplitude",
      "start_time",     "end_time",       "pipeline",        "das_stage",
      "das_rate",
      "speed_of_sound", "fs_in",          "cic_order",       "cic_decimation",
      "fir_order",      "fir_decimation", "block_length",    "n_test",
      "seed",           "output_dir"};
  return kKeys;
}

DatasetConfig DatasetConfig::from_key_values(const KeyValues& kv) {
  DatasetConfig c;
  for (const auto& [key, value] : kv) {
    auto num = [&] { return parse_double(key, value); };
    auto integer = [&] { return static_cast<int>(parse_int(key, value)); };
    if (key == "set_name") {
      c.set_name = value;
    } else if (key == "array") {
      c.array = value;
    } else if (key == "angle_start") {
      c.angle_start = num();
    } else if (key == "angle_end") {
      c.angle_end = num();
    } else if (key == "angle_step") {
      c.angle_step = num();
    } else if (key == "freq_start") {
      c.freq_start = num();
    } else if (key == "freq_end") {
      c.freq_end = num();
    } else if (key == "freq_step") {
      c.freq_step = num();
    } else if (key == "resolutions") {
      c.resolutions.clear();
      for (const auto& item : split_list(value)) {
        c.resolutions.push_back(Resolution::parse(item));
      }
    } else if (key == "delay_modes") {
      c.delay_modes.clear();
      for (const auto& item : split_list(value)) {
        c.delay_modes.push_back(DelayMode::parse(item));
      }
    } else if (key == "hr_mode") {
      c.hr_mode = DelayMode::parse(value);
    } else if (key == "lr_mode") {
      c.lr_mode = DelayMode::parse(value);
    } else if (key == "fov_azimuth") {
      c.fov_azimuth = num();
    } else if (key == "fov_elevation") {
      c.fov_elevation = num();
    } else if (key == "source_distance") {
      c.source_distance = num();
    } else if (key == "source_amplitude") {
      c.source_amplitude = num();
    } else if (key == "start_time") {
      c.start_time = num();
    } else if (key == "end_time") {
      c.end_time = num();
    } else if (key == "pipeline") {
      c.acquisition.pipeline = parse_pipeline(value);
    } else if (key == "das_stage") {
      c.acquisition.das_stage = parse_capture_stage(value);
    } else if (key == "das_rate") {
      c.acquisition.das_rate = num();
    } else if (key == "speed_of_sound") {
      c.acquisition.speed_of_sound = num();
    } else if (key == "fs_in") {
      c.acquisition.chain.fs_in = num();
    } else if (key == "cic_order") {
      c.acquisition.chain.cic_order = integer();
    } else if (key == "cic_decimation") {
      c.acquisition.chain.cic_decimation = integer();
    } else if (key == "fir_order") {
      c.acquisition.chain.fir_order = integer();
    } else if (key == "fir_decimation") {
      c.acquisition.chain.fir_decimation = integer();
    } else if (key == "block_length") {
      c.block_length = count_positive(key, value);
    } else if (key == "n_test") {
      c.n_test = count_positive(key, value);
    } else if (key == "seed") {
      const std::int64_t v = parse_int(key, value);
      if (v < 0) throw ParameterError("seed: must be non-negative");
      c.seed = static_cast<std::uint64_t>(v);
    } else if (key == "output_dir") {
      c.output_dir = value;
    } else {
      throw ParameterError("unknown dataset key '" + key + "'");
    }
  }
  return c;
}

KeyValues DatasetConfig::to_key_values() const {
  const FilterChainConfig& ch = acquisition.chain;
  return {
      {"set_name", set_name},
      {"array", array},
      {"angle_start", format_double(angle_start)},
      {"angle_end", format_double(angle_end)},
      {"angle_step", format_double(angle_step)},
      {"freq_start", format_double(freq_start)},
      {"freq_end", format_double(freq_end)},
      {"freq_step", format_double(freq_step)},
      {"resolutions", join_resolutions(resolutions)},
      {"delay_modes", join_modes(delay_modes)},
      {"hr_mode", hr_mode.to_string()},
      {"lr_mode", lr_mode.to_string()},
      {"fov_azimuth", format_double(fov_azimuth)},
      {"fov_elevation", format_double(fov_elevation)},
      {"source_distance", format_double(source_distance)},
      {"source_amplitude", format_double(source_amplitude)},
      {"start_time", format_double(start_time)},
      {"end_time", format_double(end_time)},
      {"pipeline", to_string(acquisition.pipeline)},
      {"das_stage", to_string(acquisition.das_stage)},
      {"das_rate", format_double(acquisition.das_rate)},
      {"speed_of_sound", format_double(acquisition.speed_of_sound)},
      {"fs_in", format_double(ch.fs_in)},
      {"cic_order", std::to_string(ch.cic_order)},
      {"cic_decimation", std::to_string(ch.cic_decimation)},
      {"fir_order", std::to_string(ch.fir_order)},
      {"fir_decimation", std::to_string(ch.fir_decimation)},
      {"block_length", std::to_string(block_length)},
      {"n_test", std::to_string(n_test)},
      {"seed", std::to_string(seed)},
  };
}

void DatasetConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ParameterError(what);
  };
  require(!set_name.empty() && set_name.find('/') == std::string::npos,
          "set_name must be a non-empty file name");
  require(angle_step > 0.0 && freq_step > 0.0, "grid steps must be positive");
  require(angle_end >= angle_start, "angle_end must be >= angle_start");
  require(freq_end >= freq_start && freq_start > 0.0,
          "frequencies must be positive with freq_end >= freq_start");
  require(fov_azimuth > 0.0 && fov_azimuth <= 180.0 && fov_elevation > 0.0 &&
              fov_elevation <= 180.0,
          "fields of view must lie in (0, 180] degrees");
  for (double a : angles()) {
    require(std::abs(90.0 - a) <= fov_azimuth / 2.0 + 1e-9,
            "angle " + format_double(a) + " places a source outside the FOV");
  }
  require(!resolutions.empty(), "resolutions must not be empty");
  for (const Resolution& r : resolutions) {
    require(r.width > 0 && r.height > 0, "resolutions must be positive");
  }
  require(!delay_modes.empty(), "delay_modes must not be empty");
  require(source_distance > 0.0 && source_amplitude > 0.0,
          "source distance and amplitude must be positive");
  require(end_time > start_time && start_time >= 0.0,
          "need end_time > start_time >= 0");
  require(block_length > 0, "block_length must be positive");
  acquisition.validate();
  const double rate = acquisition.beamforming_rate();
  require(2.0 * freq_end < rate, "freq_end " + format_double(freq_end) +
                                     " Hz is undersampled at " +
                                     format_double(rate) + " Hz");
}

std::vector<double> DatasetConfig::angles() const {
  return arithmetic_grid(angle_start, angle_end, angle_step);
}

std::vector<double> DatasetConfig::frequencies() const {
  return arithmetic_grid(freq_start, freq_end, freq_step);
}

Resolution DatasetConfig::hr_resolution() const {
  if (resolutions.empty()) throw ParameterError("resolutions must not be empty");
  return *std::max_element(
      resolutions.begin(), resolutions.end(),
      [](const Resolution& a, const Resolution& b) {
        return a.width * a.height < b.width * b.height;
      });
}

Scene SceneSpec::scene(const DatasetConfig& config) const {
  Scene s;
  s.start_time = config.start_time;
  s.end_time = config.end_time;
  SoundSource a;
  a.azimuth_deg = angle_deg - 90.0;
  a.distance_m = config.source_distance;
  a.frequency_hz = freq1_hz;
  a.amplitude = config.source_amplitude;
  SoundSource b = a;
  b.azimuth_deg = 90.0 - angle_deg;
  b.frequency_hz = freq2_hz;
  s.sources = {a, b};
  return s;
}

const ManifestEntry* DatasetManifest::find(const std::string& scene_id,
                                           Resolution res,
                                           DelayMode mode) const {
  for (const ManifestEntry& e : entries) {
    if (e.scene_id == scene_id && e.resolution == res && e.mode == mode) {
      return &e;
    }
  }
  return nullptr;
}

DatasetCounts count_dataset(const DatasetConfig& config) {
  config.validate();
  DatasetCounts c;
  c.positions = config.angles().size();
  c.frequencies = config.frequencies().size();
  c.scenes = c.positions * c.frequencies * c.frequencies;
  c.files = c.scenes * config.resolutions.size() * config.delay_modes.size();
  return c;
}

std::string entry_path(const DatasetConfig& config, const std::string& scene_id,
                       Resolution res, DelayMode mode) {
  return config.set_name + "/" + mode_directory(mode) + "/" + res.to_string() +
         "/" + scene_id + ".png";
}

DatasetManifest generate_manifest(const DatasetConfig& config) {
  config.validate();
  DatasetManifest m;
  m.config = config;
  const auto freqs = config.frequencies();
  for (double angle : config.angles()) {
    for (double f1 : freqs) {
      for (double f2 : freqs) {
        SceneSpec s;
        s.index = m.scenes.size();
        char id[32];
        std::snprintf(id, sizeof(id), "scene_%05zu", s.index);
        s.id = id;
        s.angle_deg = angle;
        s.freq1_hz = f1;
        s.freq2_hz = f2;
        m.scenes.push_back(s);
      }
    }
  }
  for (const SceneSpec& s : m.scenes) {
    for (const Resolution& r : config.resolutions) {
      for (const DelayMode& mode : config.delay_modes) {
        ManifestEntry e;
        e.scene_id = s.id;
        e.scene_index = s.index;
        e.angle_deg = s.angle_deg;
        e.freq1_hz = s.freq1_hz;
        e.freq2_hz = s.freq2_hz;
        e.resolution = r;
        e.mode = mode;
        e.path = entry_path(config, s.id, r, mode);
        m.entries.push_back(std::move(e));
      }
    }
  }
  return m;
}

void render_dataset(DatasetManifest& manifest, unsigned jobs) {
  const DatasetConfig& config = manifest.config;
  config.validate();
  const MicrophoneArray array = array_by_name(config.array);
  const double rate = config.acquisition.beamforming_rate();
  const double c = config.acquisition.speed_of_sound;

  // One delay table per (resolution, fraction bits), shared read-only.
  std::map<std::pair<std::size_t, int>, DelayTable> tables;
  std::vector<SteeringGrid> grids;
  for (std::size_t r = 0; r < config.resolutions.size(); ++r) {
    const Resolution res = config.resolutions[r];
    grids.push_back(build_steering_grid(res.width, res.height,
                                        config.fov_azimuth,
                                        config.fov_elevation));
    for (const DelayMode& mode : config.delay_modes) {
      const auto key = std::make_pair(r, table_bits(mode));
      if (!tables.contains(key)) {
        tables.emplace(key,
                       build_delay_table(array, grids[r], c, rate, key.second));
      }
    }
  }

  const std::size_t per_scene =
      config.resolutions.size() * config.delay_modes.size();
  if (manifest.entries.size() != manifest.scenes.size() * per_scene) {
    throw ParameterError("manifest entry count does not match its scenes");
  }
  const fs::path root(config.output_dir);
  SrpConfig srp;
  srp.block_length = config.block_length;
  srp.speed_of_sound = c;
  srp.jobs = 1;

  auto render_scene = [&](std::size_t s) {
    ManifestEntry* entries = &manifest.entries[s * per_scene];
    MicCapture capture;
    try {
      capture = acquire(manifest.scenes[s].scene(config), array,
                        config.acquisition);
    } catch (const std::exception& e) {
      for (std::size_t k = 0; k < per_scene; ++k) {
        entries[k].status = "failed";
        entries[k].error = e.what();
      }
      return;
    }
    for (std::size_t k = 0; k < per_scene; ++k) {
      ManifestEntry& entry = entries[k];
      const std::size_t r = k / config.delay_modes.size();
      try {
        const DelayTable& table = tables.at({r, table_bits(entry.mode)});
        const SrpMap map =
            acoustic_heatmap(capture, table, grids[r], entry.mode, srp);
        const AcousticImage image(map);
        const auto [lo, hi] =
            std::minmax_element(image.values.begin(), image.values.end());
        const GrayImage gray = normalize_minmax(image);
        const fs::path out = root / entry.path;
        fs::create_directories(out.parent_path());
        encode_png(gray, out.string());
        entry.raw_min = *lo;
        entry.raw_max = *hi;
        entry.status = "ok";
        entry.error.clear();
      } catch (const std::exception& e) {
        entry.status = "failed";
        entry.error = e.what();
      }
    }
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t s = next++; s < manifest.scenes.size(); s = next++) {
      render_scene(s);
    }
  };
  const unsigned n = std::max(1u, jobs);
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  }
}

void compute_bicubic_psnr(DatasetManifest& manifest) {
  const DatasetConfig& config = manifest.config;
  const Resolution hr = config.hr_resolution();
  const Resolution lr = divided(hr, 8);
  const fs::path root(config.output_dir);
  std::map<std::string, double> scores;
  for (const SceneSpec& s : manifest.scenes) {
    const ManifestEntry* hr_entry = manifest.find(s.id, hr, config.hr_mode);
    const ManifestEntry* lr_entry = manifest.find(s.id, lr, config.lr_mode);
    if (hr_entry == nullptr || lr_entry == nullptr) {
      throw ParameterError("bicubic x8 PSNR needs " + hr.to_string() + " " +
                           config.hr_mode.to_string() + " and " +
                           lr.to_string() + " " + config.lr_mode.to_string() +
                           " images");
    }
    if (hr_entry->status != "ok" || lr_entry->status != "ok") continue;
    const GrayImage truth = decode_png((root / hr_entry->path).string());
    const GrayImage low = decode_png((root / lr_entry->path).string());
    scores[s.id] = psnr(upscale(low, 8, UpscaleMethod{}), truth);
  }
  for (ManifestEntry& e : manifest.entries) {
    auto it = scores.find(e.scene_id);
    if (it == scores.end()) {
      e.bicubic_x8_psnr.reset();
    } else {
      e.bicubic_x8_psnr = it->second;
    }
  }
}

std::vector<double> kde_test_weights(const std::vector<double>& psnr) {
  const std::size_t n = psnr.size();
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::min(psnr[i], kPsnrCap);
  std::vector<double> uniform(n, 1.0);
  if (n < 2) return uniform;

  const double mean = std::accumulate(x.begin(), x.end(), 0.0) /
                      static_cast<double>(n);
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd;
  const double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
  if (!(h > 0.0) || !std::isfinite(h)) return uniform;

  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    double cdf = 0.0;
    for (std::size_t j = 0; j < n; ++j) cdf += normal_cdf((x[i] - x[j]) / h);
    w[i] = 1.0 - cdf / static_cast<double>(n);
  }
  return w;
}

std::vector<bool> split_test_kde(DatasetManifest& manifest, std::size_t n_test,
                                 std::uint64_t seed) {
  const std::size_t n = manifest.scenes.size();
  if (n_test >= n) {
    throw ParameterError("n_test " + std::to_string(n_test) +
                         " must be below the scene count " + std::to_string(n));
  }
  std::map<std::string, double> scores;
  for (const ManifestEntry& e : manifest.entries) {
    if (e.bicubic_x8_psnr) scores[e.scene_id] = *e.bicubic_x8_psnr;
  }
  std::vector<double> psnr_values(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = scores.find(manifest.scenes[i].id);
    if (it == scores.end()) {
      throw ParameterError("scene " + manifest.scenes[i].id +
                           " has no bicubic x8 PSNR");
    }
    psnr_values[i] = it->second;
  }
  const std::vector<double> weights = kde_test_weights(psnr_values);

  std::mt19937_64 rng(seed);
  auto uniform01 = [&rng] {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  std::vector<std::size_t> remaining(n);
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  std::vector<bool> test(n, false);
  for (std::size_t k = 0; k < n_test; ++k) {
    double total = 0.0;
    for (std::size_t i : remaining) total += weights[i];
    const double u = uniform01();
    std::size_t pick = remaining.size() - 1;
    if (total > 0.0) {
      const double target = u * total;
      double acc = 0.0;
      for (std::size_t r = 0; r < remaining.size(); ++r) {
        acc += weights[remaining[r]];
        if (target < acc) {
          pick = r;
          break;
        }
      }
    } else {
      pick = std::min(
          static_cast<std::size_t>(u * static_cast<double>(remaining.size())),
          remaining.size() - 1);
    }
    test[remaining[pick]] = true;
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }

  std::map<std::string, bool> by_id;
  for (std::size_t i = 0; i < n; ++i) by_id[manifest.scenes[i].id] = test[i];
  for (ManifestEntry& e : manifest.entries) {
    e.split = by_id.at(e.scene_id) ? "test" : "train";
  }
  return test;
}

std::string manifest_path(const DatasetConfig& config) {
  return (fs::path(config.output_dir) / (config.set_name + ".manifest.jsonl"))
      .string();
}

void write_manifest(const DatasetManifest& manifest, const std::string& path) {
  json config = json::object();
  for (const auto& [k, v] : manifest.config.to_key_values()) config[k] = v;
  json header = {{"format", "acmap-manifest"},
                 {"version", 1},
                 {"config", config},
                 {"scenes", manifest.scenes.size()},
                 {"entries", manifest.entries.size()}};
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest '" + path + "'");
  out << header.dump() << "\n";
  for (const ManifestEntry& e : manifest.entries) {
    json j = {{"scene_id", e.scene_id},
              {"scene_index", e.scene_index},
              {"angle_deg", e.angle_deg},
              {"freq1_hz", e.freq1_hz},
              {"freq2_hz", e.freq2_hz},
              {"width", e.resolution.width},
              {"height", e.resolution.height},
              {"mode", e.mode.to_string()},
              {"path", e.path},
              {"raw_min", e.raw_min},
              {"raw_max", e.raw_max},
              {"status", e.status},
              {"error", e.error},
              {"split", e.split}};
    if (!e.bicubic_x8_psnr) {
      j["bicubic_x8_psnr"] = nullptr;
    } else if (std::isinf(*e.bicubic_x8_psnr)) {
      j["bicubic_x8_psnr"] = "inf";
    } else {
      j["bicubic_x8_psnr"] = *e.bicubic_x8_psnr;
    }
    out << j.dump() << "\n";
  }
  if (!out) throw IoError("failed writing manifest '" + path + "'");
}

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest '" + path + "'");
  DatasetManifest m;
  std::string line;
  int line_no = 0;
  try {
    if (!std::getline(in, line)) throw IoError("empty manifest");
    ++line_no;
    const json header = json::parse(line);
    if (header.value("format", "") != "acmap-manifest" ||
        header.value("version", 0) != 1) {
      throw IoError("not an acmap-manifest version 1 file");
    }
    KeyValues kv;
    for (const auto& [k, v] : header.at("config").items()) {
      kv.emplace_back(k, v.get<std::string>());
    }
    m.config = DatasetConfig::from_key_values(kv);
    m.config.output_dir = fs::path(path).parent_path().string();
    if (m.config.output_dir.empty()) m.config.output_dir = ".";

    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json j = json::parse(line);
      ManifestEntry e;
      e.scene_id = j.at("scene_id").get<std::string>();
      e.scene_index = j.at("scene_index").get<std::size_t>();
      e.angle_deg = j.at("angle_deg").get<double>();
      e.freq1_hz = j.at("freq1_hz").get<double>();
      e.freq2_hz = j.at("freq2_hz").get<double>();
      e.resolution = {j.at("width").get<std::size_t>(),
                      j.at("height").get<std::size_t>()};
      e.mode = DelayMode::parse(j.at("mode").get<std::string>());
      e.path = j.at("path").get<std::string>();
      e.raw_min = j.at("raw_min").get<double>();
      e.raw_max = j.at("raw_max").get<double>();
      e.status = j.at("status").get<std::string>();
      e.error = j.at("error").get<std::string>();
      e.split = j.at("split").get<std::string>();
      const json& score = j.at("bicubic_x8_psnr");
      if (score.is_string()) {
        e.bicubic_x8_psnr = std::numeric_limits<double>::infinity();
      } else if (score.is_number()) {
        e.bicubic_x8_psnr = score.get<double>();
      }
      if (m.scenes.empty() || m.scenes.back().id != e.scene_id) {
        m.scenes.push_back(
            {e.scene_id, e.scene_index, e.angle_deg, e.freq1_hz, e.freq2_hz});
      }
      m.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw IoError(path + ":" + std::to_string(line_no) + ": " + e.what());
  } catch (const ParameterError& e) {
    throw IoError(path + ":" + std::to_string(line_no) + ": " + e.what());
  }
  return m;
}

EvaluationReport evaluate_pairs(const DatasetManifest& manifest, int scale,
                                UpscaleMethod method,
                                const std::string& split) {
  const DatasetConfig& config = manifest.config;
  const Resolution hr = config.hr_resolution();
  const Resolution lr = divided(hr, scale);
  const fs::path root(config.output_dir);
  EvaluationReport report;
  double psnr_sum = 0.0;
  double ssim_sum = 0.0;
  for (const SceneSpec& s : manifest.scenes) {
    const ManifestEntry* hr_entry = manifest.find(s.id, hr, config.hr_mode);
    const ManifestEntry* lr_entry = manifest.find(s.id, lr, config.lr_mode);
    if (hr_entry == nullptr || lr_entry == nullptr) {
      throw ParameterError("no " + lr.to_string() + " " +
                           config.lr_mode.to_string() + " -> " +
                           hr.to_string() + " " + config.hr_mode.to_string() +
                           " pair for " + s.id);
    }
    if (!split.empty() && hr_entry->split != split) continue;
    if (hr_entry->status != "ok" || lr_entry->status != "ok") continue;
    const GrayImage truth = decode_png((root / hr_entry->path).string());
    const GrayImage low = decode_png((root / lr_entry->path).string());
    const MetricResult r = compare(upscale(low, scale, method), truth);
    report.rows.push_back(
        {s.id, scale, config.lr_mode, method.to_string(), r.psnr_db, r.ssim});
    psnr_sum += r.psnr_db;
    ssim_sum += r.ssim;
  }
  if (report.rows.empty()) {
    throw ParameterError("no rendered pairs to evaluate");
  }
  const auto n = static_cast<double>(report.rows.size());
  report.mean_psnr_db = psnr_sum / n;
  report.mean_ssim = ssim_sum / n;
  return report;
}

void write_evaluation_csv(const EvaluationReport& report,
                          const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report '" + path + "'");
  out << "scene_id,scale,mode,method,psnr_db,ssim\n";
  for (const EvaluationRow& r : report.rows) {
    out << r.scene_id << ',' << r.scale << ',' << r.mode.to_string() << ','
        << r.method << ',' << format_metric(r.psnr_db) << ','
        << format_metric(r.ssim) << '\n';
  }
  if (!report.rows.empty()) {
    const EvaluationRow& first = report.rows.front();
    out << "mean," << first.scale << ',' << first.mode.to_string() << ','
        << first.method << ',' << format_metric(report.mean_psnr_db) << ','
        << format_metric(report.mean_ssim) << '\n';
  }
  if (!out) throw IoError("failed writing report '" + path + "'");
}

}  // namespace acmap
