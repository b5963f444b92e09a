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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tpsim/channels.hpp"
#include "tpsim/colouring.hpp"
#include "tpsim/leakage.hpp"

namespace tpsim {

// One requested channel; `resource` only matters for prime_probe.
struct ChannelRequest {
  ChannelKind kind = ChannelKind::prime_probe;
  Resource resource = Resource::l1d;

  std::string label() const;  // "prime_probe/L1-D", "kernel", ...
  friend bool operator==(const ChannelRequest&, const ChannelRequest&) = default;
};

struct ScenarioConfig {
  std::string name;

  // [platform]
  std::string profile = "haswell";

  // [domains]
  double share = 0.5;
  std::optional<ColourSet> receiver_colours;
  std::optional<ColourSet> sender_colours;
  std::optional<std::uint64_t> timeslice_us;

  // [switch]
  std::optional<Cycles> pad_cycles;
  double irq_margin = 0.05;
  bool switch_costs = true;

  // [channels]
  std::vector<ChannelRequest> channels;
  std::vector<Scenario> scenarios{Scenario::raw, Scenario::full_flush, Scenario::protected_};
  std::size_t iterations = 1000;
  std::uint64_t seed = 1;
  std::optional<double> noise_sigma;
  unsigned syscall_repeats = 4;
  std::size_t key_bits = 64;
  std::size_t matrix_bins = 16;

  // [stats]
  StatsConfig stats;

  // [overhead]
  std::vector<std::uint64_t> working_sets;
  std::vector<double> overhead_shares{0.5};

  // Channel spec for one cell, before the profile default timeslice is applied.
  ChannelSpec channel_spec(const ChannelRequest& req, Scenario scenario) const;
};

// Sections: [platform] [domains] [switch] [channels] [stats] [overhead].
// Blank lines and lines starting with '#' or ';' are ignored; unknown sections/keys are errors.
ScenarioConfig parse_config(std::string_view text, std::string name = {});
ScenarioConfig load_config_file(const std::string& path);

std::vector<std::string> builtin_config_names();
std::string_view builtin_config_text(std::string_view name);  // empty if unknown

// A path to an existing file, else a built-in name.
ScenarioConfig resolve_config(const std::string& name_or_path);

ColourSet parse_colour_list(std::string_view text);  // "0-3, 8, 10-11"
std::string format_colour_list(const ColourSet& colours);

}  // namespace tpsim
