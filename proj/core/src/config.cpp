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


#include "tpsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "tpsim/error.hpp"
#include "tpsim/profiles.hpp"

namespace tpsim {

namespace detail {
// Generated from the top-level configs/*.ini.
extern const std::map<std::string_view, std::string_view, std::less<>> kBuiltinConfigs;
}  // namespace detail

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const std::size_t comma = s.find(',');
    const std::string_view item = trim(s.substr(0, comma));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

struct Entry {
  std::string_view value;
  int line;
  std::string key;

  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError(why + " (got '" + std::string(value) + "')", line, key);
  }

  std::uint64_t u64(std::uint64_t min = 0, std::uint64_t max = UINT64_MAX) const {
    std::string_view v = value;
    std::uint64_t scale = 1;
    if (!v.empty() && (v.back() == 'K' || v.back() == 'M' || v.back() == 'G')) {
      scale = v.back() == 'K' ? 1024ULL : v.back() == 'M' ? 1024ULL * 1024 : 1024ULL * 1024 * 1024;
      v.remove_suffix(1);
    }
    std::uint64_t x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) fail("expected a non-negative integer");
    if (x > max / scale) fail("out of range");
    x *= scale;
    if (x < min || x > max) fail("out of range [" + std::to_string(min) + ", " + std::to_string(max) + "]");
    return x;
  }

  double real(double min, double max, bool open_min = false) const {
    double x = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
    if (ec != std::errc{} || ptr != value.data() + value.size() || value.empty()) fail("expected a number");
    if (x < min || x > max || (open_min && x == min)) fail("out of range");
    return x;
  }

  bool boolean() const {
    if (value == "true" || value == "yes" || value == "on" || value == "1") return true;
    if (value == "false" || value == "no" || value == "off" || value == "0") return false;
    fail("expected true or false");
  }

  ColourSet colours() const {
    try {
      return parse_colour_list(value);
    } catch (const Error&) {
      fail("expected a colour list such as 0-3,8");
    }
  }

  Entry item(std::string_view v) const { return {v, line, key}; }
};

using Handler = std::function<void(ScenarioConfig&, const Entry&)>;
using Section = std::map<std::string, Handler, std::less<>>;

Section platform_keys() {
  return {
      {"profile",
       [](ScenarioConfig& c, const Entry& e) {
         const auto names = builtin_profile_names();
         if (std::find(names.begin(), names.end(), e.value) == names.end()) e.fail("unknown profile");
         c.profile = std::string(e.value);
       }},
  };
}

Section domain_keys() {
  return {
      {"share", [](ScenarioConfig& c, const Entry& e) { c.share = e.real(0.0, 1.0, true); }},
      {"receiver_colours", [](ScenarioConfig& c, const Entry& e) { c.receiver_colours = e.colours(); }},
      {"sender_colours", [](ScenarioConfig& c, const Entry& e) { c.sender_colours = e.colours(); }},
      {"timeslice_us", [](ScenarioConfig& c, const Entry& e) { c.timeslice_us = e.u64(1, 10'000'000); }},
  };
}

Section switch_keys() {
  return {
      {"pad_cycles",
       [](ScenarioConfig& c, const Entry& e) {
         if (e.value == "auto") {
           c.pad_cycles.reset();
         } else {
           c.pad_cycles = e.u64();
         }
       }},
      {"irq_margin", [](ScenarioConfig& c, const Entry& e) { c.irq_margin = e.real(0.0, 0.9); }},
      {"costs", [](ScenarioConfig& c, const Entry& e) { c.switch_costs = e.boolean(); }},
  };
}

ChannelRequest parse_request(const Entry& e, std::string_view item) {
  ChannelRequest req;
  const std::size_t colon = item.find(':');
  const std::string_view kind = trim(item.substr(0, colon));
  const auto k = parse_channel_kind(kind);
  if (!k) e.item(item).fail("unknown channel");
  req.kind = *k;
  if (req.kind == ChannelKind::prime_probe) {
    if (colon == std::string_view::npos) e.item(item).fail("prime_probe needs a resource, e.g. prime_probe:l1d");
    const auto r = parse_resource(trim(item.substr(colon + 1)));
    if (!r) e.item(item).fail("unknown resource");
    if (*r == Resource::llc) e.item(item).fail("the LLC is probed by llc_side, not prime_probe");
    req.resource = *r;
  } else if (colon != std::string_view::npos) {
    e.item(item).fail("only prime_probe takes a resource");
  }
  return req;
}

Section channel_keys() {
  return {
      {"list",
       [](ScenarioConfig& c, const Entry& e) {
         c.channels.clear();
         for (std::string_view item : split_list(e.value)) {
           const ChannelRequest req = parse_request(e, item);
           if (std::find(c.channels.begin(), c.channels.end(), req) != c.channels.end()) {
             e.item(item).fail("channel listed twice");
           }
           c.channels.push_back(req);
         }
       }},
      {"scenarios",
       [](ScenarioConfig& c, const Entry& e) {
         c.scenarios.clear();
         for (std::string_view item : split_list(e.value)) {
           const auto s = parse_scenario(item);
           if (!s) e.item(item).fail("unknown scenario");
           if (std::find(c.scenarios.begin(), c.scenarios.end(), *s) != c.scenarios.end()) {
             e.item(item).fail("scenario listed twice");
           }
           c.scenarios.push_back(*s);
         }
         if (c.scenarios.empty()) e.fail("at least one scenario is required");
       }},
      {"iterations", [](ScenarioConfig& c, const Entry& e) { c.iterations = e.u64(8, 10'000'000); }},
      {"seed", [](ScenarioConfig& c, const Entry& e) { c.seed = e.u64(); }},
      {"noise_sigma", [](ScenarioConfig& c, const Entry& e) { c.noise_sigma = e.real(0.0, 1e12); }},
      {"syscall_repeats",
       [](ScenarioConfig& c, const Entry& e) { c.syscall_repeats = static_cast<unsigned>(e.u64(1, 1000)); }},
      {"key_bits",
       [](ScenarioConfig& c, const Entry& e) {
         c.key_bits = e.u64(2, 4096);
         if (c.key_bits % 2 != 0) e.fail("must be even");
       }},
      {"matrix_bins", [](ScenarioConfig& c, const Entry& e) { c.matrix_bins = e.u64(2, 1'000'000); }},
  };
}

Section stats_keys() {
  return {
      {"grid_points", [](ScenarioConfig& c, const Entry& e) { c.stats.grid_points = e.u64(16, 1 << 22); }},
      {"padding_bandwidths", [](ScenarioConfig& c, const Entry& e) { c.stats.padding_bandwidths = e.real(0.0, 100.0); }},
      {"epsilon", [](ScenarioConfig& c, const Entry& e) { c.stats.epsilon = e.real(0.0, 1e6, true); }},
      {"shuffles", [](ScenarioConfig& c, const Entry& e) { c.stats.shuffles = e.u64(2, 100'000); }},
      {"z", [](ScenarioConfig& c, const Entry& e) { c.stats.z = e.real(0.0, 10.0); }},
      {"empirical_prior", [](ScenarioConfig& c, const Entry& e) { c.stats.empirical_prior = e.boolean(); }},
      {"seed", [](ScenarioConfig& c, const Entry& e) { c.stats.seed = e.u64(); }},
  };
}

Section overhead_keys() {
  return {
      {"working_sets",
       [](ScenarioConfig& c, const Entry& e) {
         c.working_sets.clear();
         for (std::string_view item : split_list(e.value)) c.working_sets.push_back(e.item(item).u64(1, 1ULL << 32));
       }},
      {"shares",
       [](ScenarioConfig& c, const Entry& e) {
         c.overhead_shares.clear();
         for (std::string_view item : split_list(e.value)) c.overhead_shares.push_back(e.item(item).real(0.0, 1.0, true));
         if (c.overhead_shares.empty()) e.fail("at least one share is required");
       }},
  };
}

const std::map<std::string, Section, std::less<>>& sections() {
  static const std::map<std::string, Section, std::less<>> s{
      {"platform", platform_keys()}, {"domains", domain_keys()},  {"switch", switch_keys()},
      {"channels", channel_keys()},  {"stats", stats_keys()},     {"overhead", overhead_keys()},
  };
  return s;
}

void check_colours(const ScenarioConfig& c, const std::map<std::string, int>& lines) {
  const PlatformProfile p = builtin_profile(c.profile);
  const std::uint64_t count = colour_count(p.partitioned(), p.page_bytes);
  auto line_of = [&](const std::string& key) {
    auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
  };
  for (const auto& [key, set] : {std::pair{std::string("domains.receiver_colours"), c.receiver_colours},
                                 std::pair{std::string("domains.sender_colours"), c.sender_colours}}) {
    if (!set) continue;
    if (set->empty()) throw ConfigError("empty colour set", line_of(key), key);
    if (*set->rbegin() >= count) {
      throw ConfigError("colour " + std::to_string(*set->rbegin()) + " out of range; profile " + c.profile +
                            " has " + std::to_string(count) + " colours",
                        line_of(key), key);
    }
  }
  if (c.receiver_colours && c.sender_colours) {
    for (std::uint32_t colour : *c.receiver_colours) {
      if (c.sender_colours->count(colour)) {
        const std::string key = "domains.sender_colours";
        throw ConfigError("colour " + std::to_string(colour) + " is also assigned to the receiver",
                          line_of(key), key);
      }
    }
  }
  const bool llc_listed = std::any_of(c.channels.begin(), c.channels.end(),
                                      [](const ChannelRequest& r) { return r.kind == ChannelKind::llc_side; });
  if (llc_listed && p.cores < 2) throw ConfigError("llc_side needs a multicore profile", line_of("channels.list"), "channels.list");
}

}  // namespace

std::string ChannelRequest::label() const {
  std::string s(to_string(kind));
  if (kind == ChannelKind::prime_probe) s += "/" + std::string(to_string(resource));
  return s;
}

ChannelSpec ScenarioConfig::channel_spec(const ChannelRequest& req, Scenario scenario) const {
  ChannelSpec spec;
  spec.kind = req.kind;
  spec.resource = req.resource;
  spec.scenario = scenario;
  spec.iterations = iterations;
  spec.seed = seed;
  spec.noise_sigma = noise_sigma;
  spec.share = share;
  spec.syscall_repeats = syscall_repeats;
  spec.key_bits = key_bits;
  if (timeslice_us) {
    const PlatformProfile p = builtin_profile(profile);
    spec.timeslice = static_cast<Cycles>(*timeslice_us) * cycles_per_ms(p) / 1000;
  }
  spec.tuning.pad_cycles = pad_cycles;
  spec.tuning.irq_margin = irq_margin;
  spec.tuning.receiver_colours = receiver_colours;
  spec.tuning.sender_colours = sender_colours;
  return spec;
}

ScenarioConfig parse_config(std::string_view text, std::string name) {
  ScenarioConfig cfg;
  cfg.name = std::move(name);
  const Section* section = nullptr;
  std::string section_name;
  std::set<std::string> seen_sections;
  std::map<std::string, int> key_lines;

  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const std::size_t nl = text.find('\n');
    const std::string_view raw = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      section_name = std::string(trim(line.substr(1, line.size() - 2)));
      auto it = sections().find(section_name);
      if (it == sections().end()) throw ConfigError("unknown section [" + section_name + "]", line_no, section_name);
      if (!seen_sections.insert(section_name).second) {
        throw ConfigError("section [" + section_name + "] appears twice", line_no, section_name);
      }
      section = &it->second;
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected key = value", line_no);
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (section == nullptr) throw ConfigError("key outside of any section", line_no, key);
    const std::string full = section_name + "." + key;
    auto handler = section->find(key);
    if (handler == section->end()) throw ConfigError("unknown key", line_no, full);
    if (key_lines.count(full)) throw ConfigError("duplicate key", line_no, full);
    key_lines[full] = line_no;
    handler->second(cfg, Entry{value, line_no, full});
  }
  check_colours(cfg, key_lines);
  return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::filesystem::path(path).stem().string());
}

std::vector<std::string> builtin_config_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : detail::kBuiltinConfigs) names.emplace_back(name);
  return names;
}

std::string_view builtin_config_text(std::string_view name) {
  auto it = detail::kBuiltinConfigs.find(name);
  return it == detail::kBuiltinConfigs.end() ? std::string_view{} : it->second;
}

ScenarioConfig resolve_config(const std::string& name_or_path) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(name_or_path, ec)) return load_config_file(name_or_path);
  const std::string_view text = builtin_config_text(name_or_path);
  if (text.empty()) throw ConfigError("no config file or built-in config named '" + name_or_path + "'");
  return parse_config(text, name_or_path);
}

ColourSet parse_colour_list(std::string_view text) {
  ColourSet out;
  auto number = [](std::string_view s) {
    s = trim(s);
    std::uint32_t x = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
      throw Error(Errc::invalid_argument, "bad colour '" + std::string(s) + "'");
    }
    return x;
  };
  for (std::string_view item : split_list(text)) {
    const std::size_t dash = item.find('-');
    if (dash == std::string_view::npos) {
      out.insert(number(item));
      continue;
    }
    const std::uint32_t lo = number(item.substr(0, dash));
    const std::uint32_t hi = number(item.substr(dash + 1));
    if (hi < lo) throw Error(Errc::invalid_argument, "descending colour range '" + std::string(item) + "'");
    for (std::uint32_t c = lo; c <= hi; ++c) out.insert(c);
  }
  return out;
}

std::string format_colour_list(const ColourSet& colours) {
  std::string out;
  for (auto it = colours.begin(); it != colours.end();) {
    const std::uint32_t lo = *it;
    std::uint32_t hi = lo;
    while (++it != colours.end() && *it == hi + 1) ++hi;
    if (!out.empty()) out += ",";
    out += std::to_string(lo);
    if (hi != lo) out += "-" + std::to_string(hi);
  }
  return out;
}

}  // namespace tpsim
