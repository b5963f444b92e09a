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

#include "tpsim/error.hpp"

namespace tpsim {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::invalid_geometry: return "InvalidGeometry";
    case Errc::virtually_indexed: return "VirtuallyIndexed";
    case Errc::overlapping_colours: return "OverlappingColours";
    case Errc::pool_exhausted: return "PoolExhausted";
    case Errc::invalid_source: return "InvalidSource";
    case Errc::invalid_image: return "InvalidImage";
    case Errc::cannot_destroy_initial: return "CannotDestroyInitial";
    case Errc::pad_overrun: return "PadOverrun";
    case Errc::too_few_samples: return "TooFewSamples";
    case Errc::degenerate_alphabet: return "DegenerateAlphabet";
    case Errc::empty_input_class: return "EmptyInputClass";
    case Errc::config_error: return "ConfigError";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

namespace {

std::string format_config_message(const std::string& message, int line, const std::string& key) {
  std::string out;
  if (line > 0) out += "line " + std::to_string(line) + ": ";
  if (!key.empty()) out += "key '" + key + "': ";
  return out + message;
}

}  // namespace

ConfigError::ConfigError(std::string message, int line, std::string key)
    : Error(Errc::config_error, format_config_message(message, line, key)),
      line_(line),
      key_(std::move(key)) {}

}  // namespace tpsim
