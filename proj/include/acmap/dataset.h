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

// Multi-resolution paired heatmap datasets: scene enumeration, rendering,
// the JSON-lines manifest, the PSNR-skewed test split and baseline scoring.

#ifndef ACMAP_DATASET_H_
#define ACMAP_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "acmap/beamform.h"
#include "acmap/config.h"
#include "acmap/srtools.h"
#include "acmap/synthesis.h"

namespace acmap {

struct DatasetConfig {
  std::string set_name = "umap";
  std::string array = "umap";
  // Dataset angle theta places the sources at azimuth theta - 90 and
  // 90 - theta, mirrored about broadside.
  double angle_start = 60.0;
  double angle_end = 90.0;
  double angle_step = 2.0;
  double freq_start = 2000.0;
  double freq_end = 10000.0;
  double freq_step = 500.0;
  std::vector<Resolution> resolutions = {
      {640, 480}, {320, 240}, {160, 120}, {80, 60}};
  std::vector<DelayMode> delay_modes = {DelayMode::rounded(),
                                        DelayMode::double_precision()};
  DelayMode hr_mode = DelayMode::double_precision();
  DelayMode lr_mode = DelayMode::rounded();
  double fov_azimuth = 60.0;
  double fov_elevation = 60.0;
  double source_distance = 1.0;
  double source_amplitude = 1.0;
  double start_time = 0.05;
  double end_time = 0.10;
  AcquisitionConfig acquisition;
  std::size_t block_length = 64;
  std::size_t n_test = 96;
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  // Throws ParameterError.
  void validate() const;

  std::vector<double> angles() const;
  std::vector<double> frequencies() const;
  // The largest resolution; the ground-truth size.
  Resolution hr_resolution() const;

  // Applies recognised keys on top of the defaults; throws ParameterError on
  // unknown keys or malformed values.
  static DatasetConfig from_key_values(const KeyValues& kv);
  // Every key in canonical form except output_dir, which is implied by where
  // the manifest lives. from_key_values(to_key_values()) round-trips.
  KeyValues to_key_values() const;
  static const std::vector<std::string>& keys();
};

struct SceneSpec {
  std::string id;  // "scene_00000"
  std::size_t index = 0;
  double angle_deg = 0.0;
  double freq1_hz = 0.0;
  double freq2_hz = 0.0;

  Scene scene(const DatasetConfig& config) const;
};

struct ManifestEntry {
  std::string scene_id;
  std::size_t scene_index = 0;
  double angle_deg = 0.0;
  double freq1_hz = 0.0;
  double freq2_hz = 0.0;
  Resolution resolution;
  DelayMode mode = DelayMode::double_precision();
  std::string path;  // relative to output_dir
  double raw_min = 0.0;
  double raw_max = 0.0;
  std::string status = "pending";  // pending | ok | failed
  std::string error;
  std::string split;  // "", "train" or "test"
  std::optional<double> bicubic_x8_psnr;
};

struct DatasetManifest {
  DatasetConfig config;
  std::vector<SceneSpec> scenes;
  // Scene-major, then resolution, then delay mode.
  std::vector<ManifestEntry> entries;

  const ManifestEntry* find(const std::string& scene_id, Resolution res,
                            DelayMode mode) const;
};

struct DatasetCounts {
  std::size_t positions = 0;
  std::size_t frequencies = 0;
  std::size_t scenes = 0;
  std::size_t files = 0;
};

DatasetCounts count_dataset(const DatasetConfig& config);

DatasetManifest generate_manifest(const DatasetConfig& config);

// "<set>/<mode>/<WxH>/<scene_id>.png"; fractional modes use "frac<n>".
std::string entry_path(const DatasetConfig& config, const std::string& scene_id,
                       Resolution res, DelayMode mode);

// Renders every pending entry under config.output_dir using `jobs` workers.
// Failures are recorded on the entry. Output does not depend on `jobs`.
void render_dataset(DatasetManifest& manifest, unsigned jobs = 1);

// PSNR of the bicubic x8 upscale of each scene's lr_mode image at HR/8
// against its hr_mode HR image; stored on every entry of the scene.
void compute_bicubic_psnr(DatasetManifest& manifest);

// Weights: 1 - F(psnr), F the Gaussian KDE CDF with Silverman bandwidth,
// infinite PSNRs capped at kPsnrCap. Draws `n_test` scenes without
// replacement; returns the per-scene flag and writes split tags.
inline constexpr double kPsnrCap = 100.0;
std::vector<double> kde_test_weights(const std::vector<double>& psnr);
std::vector<bool> split_test_kde(DatasetManifest& manifest, std::size_t n_test,
                                 std::uint64_t seed);

// Header line {"format":"acmap-manifest","version":1,"config":{...}}, then
// one JSON object per entry.
// Entry paths are relative to the manifest's directory; reading sets
// config.output_dir to that directory.
void write_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest read_manifest(const std::string& path);
// "<output_dir>/<set>.manifest.jsonl"
std::string manifest_path(const DatasetConfig& config);

struct EvaluationRow {
  std::string scene_id;
  int scale = 2;
  DelayMode mode = DelayMode::rounded();
  std::string method;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

struct EvaluationReport {
  std::vector<EvaluationRow> rows;
  double mean_psnr_db = 0.0;
  double mean_ssim = 0.0;
};

// Upscales each rendered lr_mode image at HR/scale to HR and scores it
// against the hr_mode HR image. `split` filters scenes ("" keeps all).
EvaluationReport evaluate_pairs(const DatasetManifest& manifest, int scale,
                                UpscaleMethod method,
                                const std::string& split = "");

// "scene_id,scale,mode,method,psnr_db,ssim" plus a final "mean" row.
void write_evaluation_csv(const EvaluationReport& report,
                          const std::string& path);

}  // namespace acmap

#endif  // ACMAP_DATASET_H_
