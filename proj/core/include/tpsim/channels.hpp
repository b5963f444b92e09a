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
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tpsim/kernel.hpp"
#include "tpsim/leakage.hpp"
#include "tpsim/machine.hpp"

namespace tpsim {

enum class Scenario { raw, full_flush, protected_ };

std::string_view to_string(Scenario s);
std::optional<Scenario> parse_scenario(std::string_view name);

enum class ChannelKind { prime_probe, kernel_image, flush_latency, interrupt, llc_side };

std::string_view to_string(ChannelKind k);
std::optional<ChannelKind> parse_channel_kind(std::string_view name);
/// Whether a scenario is meaningful for a channel. Inter-core and timing
/// channels have no full_flush variant.
bool channel_supports(ChannelKind kind, Scenario scenario);

// Overrides for the scenario builders; unset fields keep the computed defaults.
struct ScenarioTuning {
  std::optional<Cycles> pad_cycles;  // protected only
  double irq_margin = 0.05;          // fraction of the pad reserved for a delayed tick
  std::optional<ColourSet> receiver_colours;
  std::optional<ColourSet> sender_colours;
};

struct ChannelSpec {
  ChannelKind kind = ChannelKind::prime_probe;
  Resource resource = Resource::l1d;  // prime_probe only
  Scenario scenario = Scenario::raw;
  std::size_t iterations = 1000;
  std::uint64_t seed = 1;
  std::optional<double> noise_sigma;  // default: 2% of the L1-D hit latency
  std::optional<Cycles> timeslice;    // default: per channel
  double share = 0.5;                 // receiver's fraction of the colours
  unsigned syscall_repeats = 4;       // kernel_image
  std::vector<std::uint32_t> symbols;  // restrict the input schedule to these alphabet indices
  std::optional<std::vector<int>> key;  // llc_side: explicit victim key
  std::size_t key_bits = 64;            // llc_side
  ScenarioTuning tuning;
};

/// Domain ids used by every two-party channel.
inline constexpr DomainId kReceiver{0};
inline constexpr DomainId kSender{1};

Cycles cycles_per_ms(const PlatformProfile& p);
double default_noise_sigma(const PlatformProfile& p);

/// Switch configuration of a scenario on a built system (pad from its worst case).
SwitchConfig scenario_switch_config(const System& sys, Scenario scenario, bool pad,
                                    const ScenarioTuning& tuning = {});

// Receiver/sender colour sets: the explicit ones when given, else a contiguous split by share.
std::pair<ColourSet, ColourSet> domain_colours(const PlatformProfile& p, double share,
                                               const ScenarioTuning& tuning);

struct TwoDomainOptions {
  Cycles timeslice = 1'000'000;
  double share = 0.5;
  bool coloured_userland = false;
  bool pad = true;
  unsigned sender_core = 0;
  ScenarioTuning tuning;
};

/// Receiver (domain 0, core 0) and sender (domain 1) under a scenario: shared
/// initial kernel for raw, cloned kernels otherwise, colours for protected.
/// `prepare` runs before the pad is derived (create IRQs there).
System make_scenario_system(const PlatformProfile& p, Scenario scenario, const TwoDomainOptions& opt,
                            const std::function<void(System&)>& prepare = {});

/// Input alphabet (labels) of a channel on a platform.
std::vector<std::string> channel_alphabet(const PlatformProfile& p, const ChannelSpec& spec);

SampleSet run_prime_probe(const PlatformProfile& p, const ChannelSpec& spec);
SampleSet run_kernel_channel(const PlatformProfile& p, const ChannelSpec& spec);

struct FlushLatencyResult {
  SampleSet offline;
  SampleSet online;
};
FlushLatencyResult run_flush_latency_channel(const PlatformProfile& p, const ChannelSpec& spec);

SampleSet run_interrupt_channel(const PlatformProfile& p, const ChannelSpec& spec);

struct SideChannelResult {
  std::vector<int> key;
  std::vector<int> recovered;
  double accuracy = 0;
  std::size_t quanta = 0;
  std::uint64_t hottest_set = 0;
  std::size_t reachable_sets = 0;
  std::map<std::uint64_t, std::vector<std::uint32_t>> trace;  // set -> misses per quantum (active sets)
};
SideChannelResult run_llc_side_channel(const PlatformProfile& p, const ChannelSpec& spec);

/// Interval decoding of square-function activity: 1 quantum -> 0, longer -> 1.
std::vector<int> decode_intervals(const std::vector<std::size_t>& active_quanta, std::size_t key_bits);

}  // namespace tpsim
