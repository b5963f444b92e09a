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


#include "tpsim/harness.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "tpsim/csv.hpp"
#include "tpsim/error.hpp"
#include "tpsim/profiles.hpp"
#include "tpsim/version.hpp"

namespace tpsim {

using nlohmann::json;

namespace {

constexpr std::uint64_t kWorkData = 0x1000'0000;
constexpr std::uint64_t kWorkCode = 0x4000'0000;

void run_workload(System& sys, std::string_view workload) {
  const PlatformProfile& p = sys.profile();
  auto sweep = [&](std::uint64_t base, std::uint64_t bytes, std::uint64_t line, AccessKind kind) {
    for (std::uint64_t a = 0; a < bytes; a += line) sys.user_access(0, base + a, kind);
  };
  if (workload == "idle") return;
  if (workload == "L1-D") sweep(kWorkData, p.l1d.size_bytes, p.l1d.line_bytes, AccessKind::write);
  if (workload == "L1-I") sweep(kWorkCode, p.l1i.size_bytes, p.l1i.line_bytes, AccessKind::ifetch);
  if (workload == "L2") sweep(kWorkData, p.unified[0].size_bytes, p.unified[0].line_bytes, AccessKind::write);
  if (workload == "LLC") sweep(kWorkData, p.last_level().size_bytes, p.last_level().line_bytes, AccessKind::write);
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0;
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::string file_stem(const ChannelCell& c) {
  std::string s = c.channel + "_" + std::string(to_string(c.scenario));
  for (char& ch : s) {
    if (ch == '/') ch = '_';
  }
  return s;
}

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json config_echo(const ScenarioConfig& c) {
  json j;
  j["platform"]["profile"] = c.profile;
  j["domains"]["share"] = c.share;
  j["domains"]["receiver_colours"] = c.receiver_colours ? json(format_colour_list(*c.receiver_colours)) : json(nullptr);
  j["domains"]["sender_colours"] = c.sender_colours ? json(format_colour_list(*c.sender_colours)) : json(nullptr);
  j["domains"]["timeslice_us"] = optional_json(c.timeslice_us);
  j["switch"]["pad_cycles"] = c.pad_cycles ? json(*c.pad_cycles) : json("auto");
  j["switch"]["irq_margin"] = c.irq_margin;
  j["switch"]["costs"] = c.switch_costs;
  json list = json::array();
  for (const ChannelRequest& r : c.channels) list.push_back(r.label());
  j["channels"]["list"] = list;
  json scen = json::array();
  for (Scenario s : c.scenarios) scen.push_back(std::string(to_string(s)));
  j["channels"]["scenarios"] = scen;
  j["channels"]["iterations"] = c.iterations;
  j["channels"]["seed"] = c.seed;
  j["channels"]["noise_sigma"] = optional_json(c.noise_sigma);
  j["channels"]["syscall_repeats"] = c.syscall_repeats;
  j["channels"]["key_bits"] = c.key_bits;
  j["channels"]["matrix_bins"] = c.matrix_bins;
  j["stats"]["grid_points"] = c.stats.grid_points;
  j["stats"]["padding_bandwidths"] = c.stats.padding_bandwidths;
  j["stats"]["epsilon"] = c.stats.epsilon;
  j["stats"]["shuffles"] = c.stats.shuffles;
  j["stats"]["z"] = c.stats.z;
  j["stats"]["empirical_prior"] = c.stats.empirical_prior;
  j["stats"]["seed"] = c.stats.seed;
  j["overhead"]["working_sets"] = c.working_sets;
  j["overhead"]["shares"] = c.overhead_shares;
  return j;
}

json verdict_json(const SampleSet& data, const LeakVerdict& v) {
  json j;
  j["n"] = data.size();
  j["m_bits"] = v.m.value_bits;
  j["m0_bits"] = v.m0.bound_bits;
  j["m_millibits"] = v.m.value_bits * 1e3;
  j["m0_millibits"] = v.m0.bound_bits * 1e3;
  j["leak"] = v.leak;
  j["verdict"] = v.leak ? "leak" : "no leak";
  j["clamped"] = v.m.clamped;
  j["unclamped_bits"] = v.m.unclamped_bits;
  json bw = json::object();
  std::vector<std::uint32_t> labels(data.inputs.begin(), data.inputs.end());
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  for (std::size_t i = 0; i < labels.size() && i < v.m.bandwidths.size(); ++i) {
    bw[data.alphabet.at(labels[i])] = v.m.bandwidths[i];
  }
  j["bandwidths"] = bw;
  j["grid"] = {{"points", v.m.points}, {"lo", v.m.lo}, {"hi", v.m.hi}};
  j["shuffle"] = {{"count", v.m0.shuffle_count}, {"seed", v.m0.seed}, {"mean_bits", v.m0.mean},
                  {"sd_bits", v.m0.sd},          {"z", v.m0.z},       {"confidence", v.m0.confidence}};
  return j;
}

ChannelCell sample_cell(SampleSet data, std::string channel, Scenario scenario, const ScenarioConfig& cfg) {
  ChannelCell cell;
  cell.channel = std::move(channel);
  cell.scenario = scenario;
  try {
    cell.verdict = leak_verdict(data, cfg.stats);
    cell.matrix = channel_matrix(data, cfg.matrix_bins);
  } catch (const Error& e) {
    // Too few iterations for the alphabet: keep the samples, report why there is no verdict.
    if (e.code() != Errc::too_few_samples && e.code() != Errc::empty_input_class) throw;
    cell.verdict.reset();
    cell.matrix.reset();
    cell.error = e.what();
  }
  for (std::uint32_t k = 0; k < data.alphabet.size(); ++k) {
    const std::vector<double> v = data.outputs_of(k, !data.clean.empty());
    InputSummary s;
    s.label = data.alphabet[k];
    s.n = v.size();
    for (double x : v) s.clean_mean += x;
    if (!v.empty()) s.clean_mean /= static_cast<double>(v.size());
    s.clean_sd = sample_sd(v);
    cell.inputs.push_back(s);
  }
  cell.samples = std::move(data);
  return cell;
}

json cell_json(const ChannelCell& c) {
  json j;
  j["applicable"] = c.applicable;
  if (!c.applicable) return j;
  const std::string stem = file_stem(c);
  if (c.side) {
    j["accuracy"] = c.side->accuracy;
    j["key_bits"] = c.side->key.size();
    j["quanta"] = c.side->quanta;
    j["hottest_set"] = c.side->hottest_set;
    j["reachable_sets"] = c.side->reachable_sets;
    j["recorded_sets"] = c.side->trace.size();
    std::string key, rec;
    for (int b : c.side->key) key += b ? '1' : '0';
    for (int b : c.side->recovered) rec += b ? '1' : '0';
    j["key"] = key;
    j["recovered"] = rec;
    j["files"] = {{"trace", stem + "_trace.csv"}};
    return j;
  }
  if (c.verdict) {
    j = verdict_json(*c.samples, *c.verdict);
    j["applicable"] = true;
  } else {
    j["n"] = c.samples->size();
    j["error"] = c.error;
  }
  json inputs = json::object();
  for (const InputSummary& s : c.inputs) inputs[s.label] = {{"n", s.n}, {"clean_mean", s.clean_mean}, {"clean_sd", s.clean_sd}};
  j["inputs"] = inputs;
  j["files"] = {{"samples", stem + ".csv"}};
  if (c.matrix) j["files"]["matrix"] = stem + "_matrix.csv";
  return j;
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  body(out);
  if (!out) throw Error(Errc::io_error, "error writing " + path.string());
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const ChannelCell* ScenarioReport::find(const std::string& channel, Scenario scenario) const {
  for (const ChannelCell& c : cells) {
    if (c.channel == channel && c.scenario == scenario) return &c;
  }
  return nullptr;
}

SwitchCostTable measure_switch_costs(const PlatformProfile& p, Scenario scenario, const ScenarioTuning& tuning) {
  std::vector<std::string> workloads{"idle", "L1-D", "L1-I", "L2"};
  if (p.unified.size() > 1) workloads.push_back("LLC");
  SwitchCostTable table;
  table.scenario = scenario;
  for (const std::string& w : workloads) {
    TwoDomainOptions opt;
    opt.timeslice = cycles_per_ms(p);
    opt.tuning = tuning;
    System sys = make_scenario_system(p, scenario, opt);
    run_workload(sys, w);
    sys.domain_switch(0, kSender);
    sys.domain_switch(0, kReceiver);
    run_workload(sys, w);
    table.rows.push_back({w, sys.domain_switch(0, kSender).elapsed});
  }
  return table;
}

double measure_colour_overhead(const PlatformProfile& p, std::uint64_t working_set, double share) {
  if (!(share > 0 && share <= 1)) throw Error(Errc::invalid_argument, "share must be in (0, 1]");
  const auto count = static_cast<std::uint32_t>(colour_count(p.partitioned(), p.page_bytes));
  const ColourSet part = split_colours(count, {share})[0];
  if (part.empty()) throw Error(Errc::invalid_argument, "share leaves no colours");
  const std::uint64_t line = p.l1d.line_bytes;
  auto stream = [&](const ColourSet& colours) {
    System sys(p, {DomainSpec{"stream", colours, cycles_per_ms(p), 0}});
    Cycles total = 0;
    for (int pass = 0; pass < 4; ++pass) {
      for (std::uint64_t a = 0; a < working_set; a += line) {
        const Cycles c = sys.user_access(0, kWorkData + a, AccessKind::read).latency;
        if (pass > 0) total += c;
      }
    }
    return total;
  };
  const Cycles full = stream(colour_range(0, count));
  const Cycles shared = stream(part);
  return static_cast<double>(shared) / static_cast<double>(full) - 1.0;
}

ScenarioReport run_scenario(const ScenarioConfig& cfg, const std::string& out_dir) {
  const PlatformProfile p = builtin_profile(cfg.profile);
  ScenarioReport report;
  report.config_name = cfg.name;
  report.seed = cfg.seed;

  for (const ChannelRequest& req : cfg.channels) {
    for (Scenario sc : cfg.scenarios) {
      if (!channel_supports(req.kind, sc)) {
        ChannelCell cell;
        cell.channel = req.label();
        cell.scenario = sc;
        cell.applicable = false;
        if (req.kind == ChannelKind::flush_latency) {
          cell.channel = req.label() + "/offline";
          report.cells.push_back(cell);
          cell.channel = req.label() + "/online";
        }
        report.cells.push_back(cell);
        continue;
      }
      const ChannelSpec spec = cfg.channel_spec(req, sc);
      switch (req.kind) {
        case ChannelKind::prime_probe:
          report.cells.push_back(sample_cell(run_prime_probe(p, spec), req.label(), sc, cfg));
          break;
        case ChannelKind::kernel_image:
          report.cells.push_back(sample_cell(run_kernel_channel(p, spec), req.label(), sc, cfg));
          break;
        case ChannelKind::interrupt:
          report.cells.push_back(sample_cell(run_interrupt_channel(p, spec), req.label(), sc, cfg));
          break;
        case ChannelKind::flush_latency: {
          FlushLatencyResult r = run_flush_latency_channel(p, spec);
          report.cells.push_back(sample_cell(std::move(r.offline), req.label() + "/offline", sc, cfg));
          report.cells.push_back(sample_cell(std::move(r.online), req.label() + "/online", sc, cfg));
          break;
        }
        case ChannelKind::llc_side: {
          ChannelCell cell;
          cell.channel = req.label();
          cell.scenario = sc;
          cell.side = run_llc_side_channel(p, spec);
          report.cells.push_back(std::move(cell));
          break;
        }
      }
    }
  }

  if (cfg.switch_costs) {
    const ChannelSpec tuned = cfg.channel_spec({}, Scenario::raw);
    for (Scenario sc : cfg.scenarios) report.switch_costs.push_back(measure_switch_costs(p, sc, tuned.tuning));
  }
  for (std::uint64_t ws : cfg.working_sets) {
    for (double share : cfg.overhead_shares) {
      report.overhead.push_back({ws, share, measure_colour_overhead(p, ws, share)});
    }
  }

  const json echo = config_echo(cfg);
  report.config_hash = "fnv1a64:" + hex64(fnv1a64(echo.dump()));

  json j;
  j["tool"] = {{"name", "tpsim"}, {"version", TPSIM_VERSION}};
  j["config_name"] = cfg.name;
  j["config_hash"] = report.config_hash;
  j["seed"] = cfg.seed;
  j["config"] = echo;
  j["effective"] = {{"noise_sigma", cfg.noise_sigma.value_or(default_noise_sigma(p))},
                    {"partitioned_cache", p.partitioned_cache},
                    {"colours", colour_count(p.partitioned(), p.page_bytes)},
                    {"cycles_per_ms", cycles_per_ms(p)}};
  j["method"] = {{"density", "gaussian kde, silverman bandwidth 1.06*min(sd, iqr/1.34)*n^-0.2"},
                 {"mi", "rectangle rule over a padded uniform grid, bits"},
                 {"bound", "mean + z*sd of mi over shuffled outputs"},
                 {"verdict", "leak iff m_bits > m0_bits"}};
  json channels = json::object();
  for (const ChannelCell& c : report.cells) channels[c.channel][std::string(to_string(c.scenario))] = cell_json(c);
  j["channels"] = channels;
  if (cfg.switch_costs) {
    json costs = json::object();
    for (const SwitchCostTable& t : report.switch_costs) {
      for (const SwitchCostRow& r : t.rows) costs[std::string(to_string(t.scenario))][r.workload] = r.cycles;
    }
    j["switch_costs"] = costs;
  }
  if (!report.overhead.empty()) {
    json rows = json::array();
    for (const OverheadRow& r : report.overhead) {
      rows.push_back({{"working_set", r.working_set}, {"share", r.share}, {"slowdown", r.slowdown}});
    }
    j["colour_overhead"] = rows;
  }
  report.json = j.dump(2) + "\n";

  if (!out_dir.empty()) {
    const std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(Errc::io_error, "cannot create " + out_dir + ": " + ec.message());
    write_file(dir / "report.json", [&](std::ostream& o) { o << report.json; });
    for (const ChannelCell& c : report.cells) {
      if (!c.applicable) continue;
      const std::string stem = file_stem(c);
      if (c.side) {
        write_file(dir / (stem + "_trace.csv"), [&](std::ostream& o) { write_trace_csv(o, *c.side); });
        continue;
      }
      write_file(dir / (stem + ".csv"), [&](std::ostream& o) { write_samples_csv(o, *c.samples); });
      if (c.matrix) write_file(dir / (stem + "_matrix.csv"), [&](std::ostream& o) { write_matrix_csv(o, *c.matrix); });
    }
  }
  return report;
}

std::string analysis_json(const SampleSet& data, const StatsConfig& stats) {
  const LeakVerdict v = leak_verdict(data, stats);
  json j = verdict_json(data, v);
  j["shuffle_seed"] = stats.seed;
  return j.dump(2) + "\n";
}

}  // namespace tpsim
