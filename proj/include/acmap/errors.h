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

#ifndef ACMAP_ERRORS_H_
#define ACMAP_ERRORS_H_

#include <stdexcept>
#include <string>

namespace acmap {

// Invalid argument or configuration value.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A delayed sample index fell outside the captured stream.
class WindowError : public std::out_of_range {
 public:
  WindowError(const std::string& what, std::size_t microphone)
      : std::out_of_range(what), microphone_(microphone) {}
  std::size_t microphone() const { return microphone_; }

 private:
  std::size_t microphone_;
};

// Min-max normalization of an image whose values are all equal.
class DegenerateRangeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace acmap

#endif  // ACMAP_ERRORS_H_
