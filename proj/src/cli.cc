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

#include "acmap/cli.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>

#include "CLI11.hpp"
#include "acmap/beamform.h"
#include "acmap/config.h"
#include "acmap/dataset.h"
#include "acmap/errors.h"
#include "acmap/geometry.h"
#include "acmap/imaging.h"
#include "acmap/srtools.h"
#include "acmap/synthesis.h"

namespace acmap {
namespace {

namespace fs = std::filesystem;

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

// String-valued options keyed by their config-file name.
class Command {
 public:
  Command(CLI::App& parent, const std::string& name,
          const std::string& description)
      : app_(parent.add_subcommand(name, description)) {
    app_->add_option("--config", config_path_,
                     "flat key = value file; flags override it");
  }

  CLI::App* app() const { return app_; }

  void add(const std::string& key, const std::string& help,
           const std::string& fallback = "") {
    keys_.push_back(key);
    defaults_[key] = fallback;
    std::string desc = help;
    if (!fallback.empty()) desc += " (default " + fallback + ")";
    app_->add_option("--" + dashed(key), values_[key], desc);
  }

  void add_flag(const std::string& key, const std::string& help) {
    keys_.push_back(key);
    app_->add_flag("--" + dashed(key), flags_[key], help);
  }

  bool has(const std::string& key) const {
    return app_->count("--" + dashed(key)) > 0;
  }
  bool flag(const std::string& key) const { return flags_.at(key); }

  std::string get(const std::string& key) const {
    return has(key) ? values_.at(key) : defaults_.at(key);
  }
  double number(const std::string& key) const {
    return parse_double(key, get(key));
  }
  std::int64_t integer(const std::string& key) const {
    return parse_int(key, get(key));
  }

  // Explicitly given values, in declaration order.
  KeyValues given() const {
    KeyValues kv;
    for (const auto& key : keys_) {
      if (has(key) && values_.contains(key)) kv.emplace_back(key, values_.at(key));
    }
    return kv;
  }

  bool knows(const std::string& key) const {
    return std::find(keys_.begin(), keys_.end(), key) != keys_.end();
  }

 private:
  CLI::App* app_;
  std::string config_path_;
  std::vector<std::string> keys_;
  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> defaults_;
  std::map<std::string, bool> flags_;
};

std::string default_output_dir() {
  const char* env = std::getenv(kOutputDirEnv);
  return env != nullptr && *env != '\0' ? env : "acmap_out";
}

void add_common(Command& cmd, bool with_jobs) {
  cmd.add("output_dir", "output root", default_output_dir());
  cmd.add("output", "output file (default under the output root)");
  if (with_jobs) cmd.add("jobs", "worker threads", "1");
}

void add_acquisition(Command& cmd) {
  cmd.add("array", "'umap' or an x,y,z CSV file", "umap");
  cmd.add("pipeline", "direct | pdm", "direct");
  cmd.add("das_stage", "post_cic | post_fir", "post_cic");
  cmd.add("das_rate",
          "direct-pipeline beamforming rate in Hz; 0 follows das_stage", "0");
  cmd.add("speed_of_sound", "m/s", "343");
  const FilterChainConfig chain;
  cmd.add("fs_in", "PDM rate in Hz", "3125000");
  cmd.add("cic_order", "CIC stages", std::to_string(chain.cic_order));
  cmd.add("cic_decimation", "CIC decimation",
          std::to_string(chain.cic_decimation));
  cmd.add("fir_order", "FIR order", std::to_string(chain.fir_order));
  cmd.add("fir_decimation", "FIR decimation",
          std::to_string(chain.fir_decimation));
}

AcquisitionConfig acquisition_from(const Command& cmd) {
  AcquisitionConfig a;
  a.pipeline = parse_pipeline(cmd.get("pipeline"));
  a.das_stage = parse_capture_stage(cmd.get("das_stage"));
  a.das_rate = cmd.number("das_rate");
  a.speed_of_sound = cmd.number("speed_of_sound");
  a.chain.fs_in = cmd.number("fs_in");
  a.chain.cic_order = static_cast<int>(cmd.integer("cic_order"));
  a.chain.cic_decimation = static_cast<int>(cmd.integer("cic_decimation"));
  a.chain.fir_order = static_cast<int>(cmd.integer("fir_order"));
  a.chain.fir_decimation = static_cast<int>(cmd.integer("fir_decimation"));
  a.validate();
  return a;
}

unsigned jobs_from(const Command& cmd) {
  const std::int64_t jobs = cmd.integer("jobs");
  if (jobs < 1 || jobs > 1024) throw ParameterError("jobs must be in [1, 1024]");
  return static_cast<unsigned>(jobs);
}

std::string output_file(const Command& cmd, const std::string& name) {
  if (cmd.has("output")) return cmd.get("output");
  const fs::path dir(cmd.get("output_dir"));
  fs::create_directories(dir);
  return (dir / name).string();
}

std::string mode_tag(DelayMode mode) {
  std::string tag = mode.to_string();
  std::replace(tag.begin(), tag.end(), ':', '-');
  return tag;
}

int scale_from(const Command& cmd) {
  const std::int64_t s = cmd.integer("scale");
  if (s != 2 && s != 4 && s != 8) throw ParameterError("scale must be 2, 4 or 8");
  return static_cast<int>(s);
}

// Finds the value of --config in `args`, if present.
std::string find_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  return path;
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int do_simulate(const Command& cmd, std::ostream& out) {
  const Scene scene = load_scene(cmd.get("scene"));
  const MicrophoneArray array = array_by_name(cmd.get("array"));
  AcquisitionConfig acq = acquisition_from(cmd);
  const MicCapture capture = acquire(scene, array, acq);
  const std::string path = output_file(cmd, "capture.acmcap");
  save_capture(capture, path);
  out << "wrote " << path << "\n";
  return kExitOk;
}

int do_beamform(const Command& cmd, std::ostream& out) {
  const MicCapture capture = load_capture(cmd.get("capture"));
  const MicrophoneArray array = array_by_name(cmd.get("array"));
  const DelayMode mode = DelayMode::parse(cmd.get("mode"));
  const Resolution res = Resolution::parse(cmd.get("resolution"));
  const SteeringGrid grid =
      build_steering_grid(res.width, res.height, cmd.number("fov_azimuth"),
                          cmd.number("fov_elevation"));
  SrpConfig srp;
  srp.block_length = static_cast<std::size_t>(cmd.integer("block_length"));
  srp.speed_of_sound = cmd.number("speed_of_sound");
  srp.jobs = jobs_from(cmd);
  const SrpMap map = acoustic_heatmap(capture, array, grid, mode, srp);
  const AcousticImage image(map);
  const std::string path = output_file(
      cmd, "heatmap_" + mode_tag(mode) + "_" + res.to_string() + ".png");
  encode_png(normalize_minmax(image), path);
  const auto [lo, hi] = std::minmax_element(map.values.begin(), map.values.end());
  out << "raw_min " << format_metric(*lo) << "\nraw_max "
      << format_metric(*hi) << "\n";
  out << "wrote " << path << "\n";
  return kExitOk;
}

ResponseConfig response_from(const Command& cmd) {
  ResponseConfig rc;
  rc.acquisition = acquisition_from(cmd);
  rc.source_distance = cmd.number("source_distance");
  rc.block_length = static_cast<std::size_t>(cmd.integer("block_length"));
  return rc;
}

int do_polar(const Command& cmd, std::ostream& out) {
  const MicrophoneArray array = array_by_name(cmd.get("array"));
  const DelayMode mode = DelayMode::parse(cmd.get("mode"));
  const PolarResponse r = polar_response(
      array, cmd.number("frequency"), cmd.number("source_angle"), mode,
      cmd.number("resolution_deg"), response_from(cmd));
  const std::string path = output_file(cmd, "polar_" + mode_tag(mode) + ".csv");
  write_polar_csv(r, path);
  out << "wrote " << path << "\n";
  return kExitOk;
}

int do_waterfall(const Command& cmd, std::ostream& out) {
  const MicrophoneArray array = array_by_name(cmd.get("array"));
  const DelayMode mode = DelayMode::parse(cmd.get("mode"));
  const Waterfall w = waterfall_response(
      array, cmd.number("freq_min"), cmd.number("freq_max"),
      cmd.number("freq_step"), cmd.number("source_angle"), mode,
      cmd.number("resolution_deg"), response_from(cmd));
  const std::string path =
      output_file(cmd, "waterfall_" + mode_tag(mode) + ".csv");
  write_waterfall_csv(w, path);
  out << "wrote " << path << "\n";
  return kExitOk;
}

int do_dataset(const Command& cmd, std::ostream& out, std::ostream& err) {
  KeyValues kv = cmd.given();
  kv.erase(std::remove_if(kv.begin(), kv.end(),
                          [](const auto& p) { return p.first == "jobs"; }),
           kv.end());
  if (!cmd.has("output_dir")) kv.emplace_back("output_dir", default_output_dir());
  const DatasetConfig config = DatasetConfig::from_key_values(kv);
  const unsigned jobs = jobs_from(cmd);
  const DatasetCounts counts = count_dataset(config);
  const bool split = config.n_test > 0;
  if (split) {
    if (config.n_test >= counts.scenes) {
      throw ParameterError("n_test " + std::to_string(config.n_test) +
                           " must be below the scene count " +
                           std::to_string(counts.scenes));
    }
    const Resolution hr = config.hr_resolution();
    const Resolution lr{hr.width / 8, hr.height / 8};
    auto has_res = [&](Resolution r) {
      return std::find(config.resolutions.begin(), config.resolutions.end(),
                       r) != config.resolutions.end();
    };
    auto has_mode = [&](DelayMode m) {
      return std::find(config.delay_modes.begin(), config.delay_modes.end(),
                       m) != config.delay_modes.end();
    };
    if (hr.width % 8 != 0 || hr.height % 8 != 0 || !has_res(lr) ||
        !has_mode(config.hr_mode) || !has_mode(config.lr_mode)) {
      throw ParameterError(
          "the test split needs an HR/8 resolution and both hr_mode and "
          "lr_mode among delay_modes; set n_test = 0 to skip it");
    }
  }

  out << "positions " << counts.positions << "\n"
      << "frequencies " << counts.frequencies << "\n"
      << "scenes_per_set " << counts.scenes << "\n"
      << "resolutions " << config.resolutions.size() << "\n"
      << "delay_modes " << config.delay_modes.size() << "\n"
      << "files " << counts.files << "\n";
  if (cmd.flag("dry_run")) return kExitOk;

  DatasetManifest manifest = generate_manifest(config);
  render_dataset(manifest, jobs);
  std::size_t failed = 0;
  for (const ManifestEntry& e : manifest.entries) {
    if (e.status != "ok") {
      ++failed;
      err << "warning: " << e.path << ": " << e.error << "\n";
    }
  }
  if (split) {
    compute_bicubic_psnr(manifest);
    const std::vector<bool> test =
        split_test_kde(manifest, config.n_test, config.seed);
    out << "test_scenes " << std::count(test.begin(), test.end(), true) << "\n";
  }
  const std::string path = manifest_path(config);
  write_manifest(manifest, path);
  out << "wrote " << counts.files - failed << " images under "
      << (fs::path(config.output_dir) / config.set_name).string() << "\n";
  out << "wrote " << path << "\n";
  if (failed > 0) {
    err << "error: runtime: " << failed << " entries failed to render\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int do_upscale(const Command& cmd, std::ostream& out) {
  const GrayImage input = decode_png(cmd.get("input"));
  const int scale = scale_from(cmd);
  const UpscaleMethod method = UpscaleMethod::parse(cmd.get("method"));
  const GrayImage result = upscale(input, scale, method);
  const std::string path = output_file(
      cmd, "upscaled_x" + std::to_string(scale) + "_" + method.to_string() +
               ".png");
  encode_png(result, path);
  if (cmd.has("reference")) {
    const MetricResult m = compare(result, decode_png(cmd.get("reference")));
    out << "psnr_db " << format_metric(m.psnr_db) << "\nssim "
        << format_metric(m.ssim) << "\n";
  }
  out << "wrote " << path << "\n";
  return kExitOk;
}

int do_evaluate(const Command& cmd, std::ostream& out) {
  const DatasetManifest manifest = read_manifest(cmd.get("pairs"));
  const int scale = scale_from(cmd);
  const UpscaleMethod method = UpscaleMethod::parse(cmd.get("method"));
  std::string split = cmd.get("split");
  if (split != "all" && split != "train" && split != "test") {
    throw ParameterError("split must be all, train or test");
  }
  if (split == "all") split.clear();
  const EvaluationReport report = evaluate_pairs(manifest, scale, method, split);
  const std::string path = output_file(
      cmd, "evaluate_x" + std::to_string(scale) + "_" + method.to_string() +
               ".csv");
  write_evaluation_csv(report, path);
  out << "pairs " << report.rows.size() << "\nmean_psnr_db "
      << format_metric(report.mean_psnr_db) << "\nmean_ssim "
      << format_metric(report.mean_ssim) << "\n";
  out << "wrote " << path << "\n";
  return kExitOk;
}

int do_profile(const Command& cmd, std::ostream& out) {
  const GrayImage image = decode_png(cmd.get("input"));
  const std::size_t row = cmd.has("row")
                              ? static_cast<std::size_t>(cmd.integer("row"))
                              : image.height / 2;
  if (cmd.has("row") && cmd.integer("row") < 0) {
    throw ParameterError("row must be non-negative");
  }
  const std::vector<double> profile = row_profile(image, row);
  const std::string path =
      output_file(cmd, "profile_row" + std::to_string(row) + ".csv");
  write_row_profile_csv(profile, path);
  out << "wrote " << path << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app("Acoustic map simulator and super-resolution benchmark tools",
               "acmap");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  std::map<std::string, std::unique_ptr<Command>> commands;
  auto make = [&](const std::string& name, const std::string& description) {
    auto& cmd = commands[name];
    cmd = std::make_unique<Command>(app, name, description);
    return cmd.get();
  };

  Command* simulate = make("simulate", "scene file -> capture file");
  simulate->add("scene", "scene JSON file");
  simulate->app()->get_option("--scene")->required();
  add_acquisition(*simulate);
  add_common(*simulate, false);

  Command* beamform = make("beamform", "capture file -> heatmap PNG");
  beamform->add("capture", "capture file");
  beamform->app()->get_option("--capture")->required();
  beamform->add("array", "'umap' or an x,y,z CSV file", "umap");
  beamform->add("mode", "rounded | frac:<n> | double", "double");
  beamform->add("resolution", "heatmap size WxH", "640x480");
  beamform->add("fov_azimuth", "degrees", "60");
  beamform->add("fov_elevation", "degrees", "60");
  beamform->add("block_length", "SRP block length", "64");
  beamform->add("speed_of_sound", "m/s", "343");
  add_common(*beamform, true);

  for (const char* name : {"polar", "waterfall"}) {
    const bool polar = std::string(name) == "polar";
    Command* cmd = make(name, polar ? "polar response CSV"
                                    : "per-frequency polar responses CSV");
    if (polar) {
      cmd->add("frequency", "Hz", "2000");
    } else {
      cmd->add("freq_min", "Hz", "2000");
      cmd->add("freq_max", "Hz", "10000");
      cmd->add("freq_step", "Hz", "250");
    }
    cmd->add("source_angle", "in-plane degrees from +x toward +y", "180");
    cmd->add("mode", "rounded | frac:<n> | double", "double");
    cmd->add("resolution_deg", "angular step", "1");
    cmd->add("source_distance", "m", "1");
    cmd->add("block_length", "SRP block length", "64");
    add_acquisition(*cmd);
    add_common(*cmd, false);
  }

  Command* dataset = make("dataset", "render a paired multi-resolution dataset");
  {
    const DatasetConfig defaults;
    const KeyValues kv = defaults.to_key_values();
    for (const std::string& key : DatasetConfig::keys()) {
      if (key == "output_dir") continue;
      auto it = std::find_if(kv.begin(), kv.end(),
                             [&](const auto& p) { return p.first == key; });
      dataset->add(key, "dataset parameter",
                   it == kv.end() ? std::string() : it->second);
    }
    dataset->add_flag("dry_run", "print counts without rendering");
    dataset->add("output_dir", "output root", default_output_dir());
    dataset->add("jobs", "worker threads", "1");
  }

  Command* up = make("upscale", "bicubic / bicubic+gaussian upscaling");
  up->add("input", "PNG file");
  up->app()->get_option("--input")->required();
  up->add("scale", "2 | 4 | 8", "2");
  up->add("method", "bicubic | bicubic+g<k>", "bicubic");
  up->add("reference", "optional HR PNG to score against");
  add_common(*up, false);

  Command* evaluate = make("evaluate", "PSNR/SSIM report over a manifest");
  evaluate->add("pairs", "manifest file");
  evaluate->app()->get_option("--pairs")->required();
  evaluate->add("scale", "2 | 4 | 8", "2");
  evaluate->add("method", "bicubic | bicubic+g<k>", "bicubic");
  evaluate->add("split", "all | train | test", "all");
  add_common(*evaluate, false);

  Command* profile = make("profile", "row profile CSV of a PNG");
  profile->add("input", "PNG file");
  profile->app()->get_option("--input")->required();
  profile->add("row", "row index (default: middle row)");
  add_common(*profile, false);

  try {
    // Config-file values go first so explicit flags override them.
    std::vector<std::string> argv = args;
    const std::string config = find_config(args);
    if (!config.empty() && !args.empty()) {
      auto it = commands.find(args.front());
      if (it == commands.end()) {
        throw UsageError("--config must follow a subcommand");
      }
      std::vector<std::string> injected;
      for (const auto& [key, value] : load_config_file(config)) {
        if (!it->second->knows(key)) {
          throw UsageError("unknown key '" + key + "' in " + config +
                           " for '" + args.front() + "'");
        }
        injected.push_back("--" + dashed(key) + "=" + value);
      }
      argv.insert(argv.begin() + 1, injected.begin(), injected.end());
    }
    std::reverse(argv.begin(), argv.end());  // CLI11 consumes from the back
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParameterError& e) {
    err << "error: usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: io: " << e.what() << "\n";
    return kExitRuntime;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  const Command& cmd = *commands.at(name);
  try {
    if (name == "simulate") return do_simulate(cmd, out);
    if (name == "beamform") return do_beamform(cmd, out);
    if (name == "polar") return do_polar(cmd, out);
    if (name == "waterfall") return do_waterfall(cmd, out);
    if (name == "dataset") return do_dataset(cmd, out, err);
    if (name == "upscale") return do_upscale(cmd, out);
    if (name == "evaluate") return do_evaluate(cmd, out);
    return do_profile(cmd, out);
  } catch (const ParameterError& e) {
    err << "error: parameter: " << e.what() << "\n";
    return kExitUsage;
  } catch (const WindowError& e) {
    err << "error: window: " << e.what() << "\n";
  } catch (const DegenerateRangeError& e) {
    err << "error: range: " << e.what() << "\n";
  } catch (const IoError& e) {
    err << "error: io: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: runtime: " << e.what() << "\n";
  }
  return kExitRuntime;
}

}  // namespace acmap
