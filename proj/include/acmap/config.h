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

// Flat "key = value" configuration files.
//
//   # comment
//   angle_start = 60
//   resolutions = 640x480, 320x240
//
// Keys are lowercase identifiers; each may appear once. Values run to the
// end of the line with surrounding whitespace trimmed.

#ifndef ACMAP_CONFIG_H_
#define ACMAP_CONFIG_H_

#include <cstdint>
#include <istream>
#include <string>
#include <utility>
#include <vector>

namespace acmap {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_key_values(std::istream& in, const std::string& source);
KeyValues load_config_file(const std::string& path);

double parse_double(const std::string& key, const std::string& value);
std::int64_t parse_int(const std::string& key, const std::string& value);
std::vector<std::string> split_list(const std::string& value);

struct Resolution {
  std::size_t width = 0;
  std::size_t height = 0;

  static Resolution parse(const std::string& text);  // "WxH"
  std::string to_string() const;

  friend bool operator==(const Resolution&, const Resolution&) = default;
};

}  // namespace acmap

#endif  // ACMAP_CONFIG_H_
