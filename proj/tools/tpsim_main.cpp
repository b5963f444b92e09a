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


#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include "tpsim/config.hpp"
#include "tpsim/csv.hpp"
#include "tpsim/error.hpp"
#include "tpsim/harness.hpp"
#include "tpsim/kernel.hpp"
#include "tpsim/profiles.hpp"
#include "tpsim/version.hpp"

namespace {

using namespace tpsim;

void print_summary(const ScenarioReport& r) {
  for (const ChannelCell& c : r.cells) {
    const std::string scenario(to_string(c.scenario));
    if (!c.applicable) {
      std::printf("%-24s %-10s n/a\n", c.channel.c_str(), scenario.c_str());
    } else if (!c.error.empty()) {
      std::printf("%-24s %-10s %s\n", c.channel.c_str(), scenario.c_str(), c.error.c_str());
    } else if (c.side) {
      std::printf("%-24s %-10s key recovery %.1f%%\n", c.channel.c_str(), scenario.c_str(), 100 * c.side->accuracy);
    } else {
      std::printf("%-24s %-10s M %9.2f mb  M0 %9.2f mb  %s\n", c.channel.c_str(), scenario.c_str(),
                  1e3 * c.verdict->m.value_bits, 1e3 * c.verdict->m0.bound_bits, c.verdict->leak ? "LEAK" : "no leak");
    }
  }
  for (const SwitchCostTable& t : r.switch_costs) {
    std::printf("switch %-10s", std::string(to_string(t.scenario)).c_str());
    for (const SwitchCostRow& row : t.rows) std::printf("  %s=%llu", row.workload.c_str(), static_cast<unsigned long long>(row.cycles));
    std::printf("\n");
  }
  for (const OverheadRow& o : r.overhead) {
    std::printf("colour overhead ws=%llu share=%.2f slowdown=%+.4f\n", static_cast<unsigned long long>(o.working_set),
                o.share, o.slowdown);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tpsim: time-protection channel simulator"};
  app.set_version_flag("--version", std::string(TPSIM_VERSION));
  app.require_subcommand(1);

  std::string config, out_dir;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run a scenario config (file path or built-in name)");
  run->add_option("config", config, "Config file or built-in config name")->required();
  run->add_option("--out", out_dir, "Directory for report.json and CSVs; without it the report goes to stdout");
  run->add_flag("-q,--quiet", quiet, "Skip the summary table");

  std::string csv;
  StatsConfig stats;
  auto* analyze = app.add_subcommand("analyze", "MI, zero-leakage bound and verdict for a samples CSV");
  analyze->add_option("samples", csv, "CSV with columns iteration,input,output")->required();
  analyze->add_option("--shuffles", stats.shuffles, "Shuffled datasets for the bound")->capture_default_str();
  analyze->add_option("--z", stats.z, "Normal quantile for the bound")->capture_default_str();
  analyze->add_option("--seed", stats.seed, "Shuffle seed")->capture_default_str();
  analyze->add_option("--grid", stats.grid_points, "Grid points")->capture_default_str();
  analyze->add_flag("--empirical-prior", stats.empirical_prior, "Weight inputs by observed frequency");

  auto* profiles = app.add_subcommand("profiles", "List built-in platform profiles and configs");

  std::string profile_name, scenario_name;
  auto* cost = app.add_subcommand("switch-cost", "Domain-switch cost per receiver workload");
  cost->add_option("profile", profile_name, "Built-in profile")->required();
  cost->add_option("scenario", scenario_name, "raw, full_flush or protected")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const ScenarioConfig cfg = resolve_config(config);
      const ScenarioReport report = run_scenario(cfg, out_dir);
      if (out_dir.empty()) {
        std::cout << report.json;
      } else if (!quiet) {
        print_summary(report);
        std::printf("wrote %s/report.json\n", out_dir.c_str());
      }
    } else if (*analyze) {
      std::cout << analysis_json(read_samples_csv_file(csv), stats);
    } else if (*profiles) {
      for (const std::string& name : builtin_profile_names()) {
        const PlatformProfile p = builtin_profile(name);
        std::printf("%-8s %s; partitioned %s, %llu colours\n", name.c_str(), p.description.c_str(),
                    p.partitioned_cache.c_str(),
                    static_cast<unsigned long long>(colour_count(p.partitioned(), p.page_bytes)));
      }
      std::printf("configs:");
      for (const std::string& name : builtin_config_names()) std::printf(" %s", name.c_str());
      std::printf("\n");
    } else if (*cost) {
      const auto scenario = parse_scenario(scenario_name);
      if (!scenario) throw ConfigError("unknown scenario '" + scenario_name + "'", 0, "scenario");
      PlatformProfile p;
      try {
        p = builtin_profile(profile_name);
      } catch (const Error& e) {
        throw ConfigError(e.what(), 0, "profile");
      }
      for (const SwitchCostRow& row : measure_switch_costs(p, *scenario).rows) {
        std::printf("%-6s %llu\n", row.workload.c_str(), static_cast<unsigned long long>(row.cycles));
      }
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const PadOverrun& e) {
    std::fprintf(stderr, "pad overrun: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
