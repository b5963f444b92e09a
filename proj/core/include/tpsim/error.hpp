// Copyright 2026 The tpsim Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tpsim {

enum class Errc {
  invalid_argument,
  invalid_geometry,
  virtually_indexed,
  overlapping_colours,
  pool_exhausted,
  invalid_source,
  invalid_image,
  cannot_destroy_initial,
  pad_overrun,
  too_few_samples,
  degenerate_alphabet,
  empty_input_class,
  config_error,
  io_error,
};

std::string_view to_string(Errc code);

/// Every failure raised by the library is an Error carrying a stable code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Config diagnostics keep the offending line (0 when not tied to one) and key.
class ConfigError : public Error {
 public:
  ConfigError(std::string message, int line = 0, std::string key = {});

  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  int line_;
  std::string key_;
};

}  // namespace tpsim
