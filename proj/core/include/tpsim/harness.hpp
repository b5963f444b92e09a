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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tpsim/channels.hpp"
#include "tpsim/config.hpp"
#include "tpsim/leakage.hpp"

namespace tpsim {

struct InputSummary {
  std::string label;
  std::size_t n = 0;
  double clean_mean = 0;
  double clean_sd = 0;  // sample sd of the noise-free outputs
};

// One channel x scenario cell. Flush latency contributes two cells (offline and online time).
struct ChannelCell {
  std::string channel;
  Scenario scenario = Scenario::raw;
  bool applicable = true;
  std::optional<SampleSet> samples;
  std::optional<LeakVerdict> verdict;
  std::vector<InputSummary> inputs;
  std::optional<ChannelMatrix> matrix;
  std::optional<SideChannelResult> side;
  std::string error;  // set when the samples could not be analysed
};

struct SwitchCostRow {
  std::string workload;
  Cycles cycles = 0;
};

struct SwitchCostTable {
  Scenario scenario = Scenario::raw;
  std::vector<SwitchCostRow> rows;
};

struct OverheadRow {
  std::uint64_t working_set = 0;
  double share = 1;
  double slowdown = 0;
};

struct ScenarioReport {
  std::string config_name;
  std::string config_hash;  // FNV-1a 64 over the canonical config echo
  std::uint64_t seed = 0;
  std::vector<ChannelCell> cells;
  std::vector<SwitchCostTable> switch_costs;
  std::vector<OverheadRow> overhead;
  std::string json;  // report.json contents

  const ChannelCell* find(const std::string& channel, Scenario scenario) const;
};

// Receiver workloads: idle, L1-D, L1-I, L2 and, where present, LLC. Cost is the elapsed cycles of
// a switch from the receiver (after running the workload) to an idle domain.
SwitchCostTable measure_switch_costs(const PlatformProfile& p, Scenario scenario,
                                     const ScenarioTuning& tuning = {});

// Streaming workload over `working_set` bytes with `share` of the colours vs all of them; returns
// the cycle ratio minus one.
double measure_colour_overhead(const PlatformProfile& p, std::uint64_t working_set, double share);

// Runs every requested cell. With a non-empty out_dir, writes report.json and the CSVs there.
ScenarioReport run_scenario(const ScenarioConfig& cfg, const std::string& out_dir = {});

// Statistics only, as emitted by `tpsim analyze`.
std::string analysis_json(const SampleSet& data, const StatsConfig& stats);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace tpsim
