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


#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tpsim/config.hpp"
#include "tpsim/error.hpp"

namespace tpsim {
namespace {

ConfigError config_error(std::string_view text) {
  try {
    parse_config(text, "t");
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "no ConfigError for:\n" << text;
  return ConfigError("none");
}

TEST(Config, Defaults) {
  const ScenarioConfig c = parse_config("", "empty");
  EXPECT_EQ(c.name, "empty");
  EXPECT_EQ(c.profile, "haswell");
  EXPECT_TRUE(c.channels.empty());
  EXPECT_EQ(c.scenarios.size(), 3u);
  EXPECT_EQ(c.stats.shuffles, 100u);
  EXPECT_DOUBLE_EQ(c.stats.z, 1.645);
  EXPECT_FALSE(c.pad_cycles);
  EXPECT_TRUE(c.switch_costs);
}

TEST(Config, ParsesEverySection) {
  const ScenarioConfig c = parse_config(R"(
# comment
; also a comment
[platform]
profile = sabre
[domains]
share = 0.25
receiver_colours = 0-3
sender_colours = 8, 10-11
timeslice_us = 2500
[switch]
pad_cycles = 90000
irq_margin = 0.1
costs = off
[channels]
list = prime_probe:tlb, kernel, flush_latency, interrupt
scenarios = raw, protected
iterations = 64
seed = 7
noise_sigma = 0.5
syscall_repeats = 2
key_bits = 32
matrix_bins = 8
[stats]
grid_points = 1024
padding_bandwidths = 4
epsilon = 1e-4
shuffles = 20
z = 2
empirical_prior = yes
seed = 9
[overhead]
working_sets = 16K, 1M, 4096
shares = 0.5, 1
)");
  EXPECT_EQ(c.profile, "sabre");
  EXPECT_DOUBLE_EQ(c.share, 0.25);
  EXPECT_EQ(c.receiver_colours, (ColourSet{0, 1, 2, 3}));
  EXPECT_EQ(c.sender_colours, (ColourSet{8, 10, 11}));
  EXPECT_EQ(c.timeslice_us, 2500u);
  EXPECT_EQ(c.pad_cycles, 90000u);
  EXPECT_DOUBLE_EQ(c.irq_margin, 0.1);
  EXPECT_FALSE(c.switch_costs);
  ASSERT_EQ(c.channels.size(), 4u);
  EXPECT_EQ(c.channels[0], (ChannelRequest{ChannelKind::prime_probe, Resource::tlb}));
  EXPECT_EQ(c.channels[1].kind, ChannelKind::kernel_image);
  EXPECT_EQ(c.scenarios, (std::vector<Scenario>{Scenario::raw, Scenario::protected_}));
  EXPECT_EQ(c.iterations, 64u);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.noise_sigma, 0.5);
  EXPECT_EQ(c.syscall_repeats, 2u);
  EXPECT_EQ(c.key_bits, 32u);
  EXPECT_EQ(c.matrix_bins, 8u);
  EXPECT_EQ(c.stats.grid_points, 1024u);
  EXPECT_DOUBLE_EQ(c.stats.padding_bandwidths, 4.0);
  EXPECT_DOUBLE_EQ(c.stats.epsilon, 1e-4);
  EXPECT_EQ(c.stats.shuffles, 20u);
  EXPECT_DOUBLE_EQ(c.stats.z, 2.0);
  EXPECT_TRUE(c.stats.empirical_prior);
  EXPECT_EQ(c.stats.seed, 9u);
  EXPECT_EQ(c.working_sets, (std::vector<std::uint64_t>{16384, 1 << 20, 4096}));
  EXPECT_EQ(c.overhead_shares, (std::vector<double>{0.5, 1.0}));

  const ChannelSpec spec = c.channel_spec(c.channels[0], Scenario::protected_);
  EXPECT_EQ(spec.resource, Resource::tlb);
  EXPECT_EQ(spec.iterations, 64u);
  EXPECT_EQ(spec.seed, 7u);
  EXPECT_EQ(spec.tuning.pad_cycles, 90000u);
  EXPECT_EQ(spec.tuning.receiver_colours, c.receiver_colours);
}

TEST(Config, ErrorsCarryLineAndKey) {
  struct Case {
    const char* text;
    int line;
    const char* key;
  };
  const Case cases[] = {
      {"[switch]\nfoo = 1\n", 2, "switch.foo"},
      {"[nowhere]\n", 1, "nowhere"},
      {"profile = haswell\n", 1, "profile"},
      {"[platform]\nprofile = pentium\n", 2, "platform.profile"},
      {"[channels]\niterations = 3\n", 2, "channels.iterations"},
      {"[channels]\nlist = prime_probe:llc\n", 2, "channels.list"},
      {"[channels]\nlist = teleport\n", 2, "channels.list"},
      {"[channels]\nscenarios = raw, maybe\n", 2, "channels.scenarios"},
      {"[channels]\nkey_bits = 7\n", 2, "channels.key_bits"},
      {"[domains]\nshare = 1.5\n", 2, "domains.share"},
      {"[domains]\nshare = half\n", 2, "domains.share"},
      {"[switch]\npad_cycles = soon\n", 2, "switch.pad_cycles"},
      {"[switch]\nirq_margin = 0.95\n", 2, "switch.irq_margin"},
      {"[switch]\ncosts = perhaps\n", 2, "switch.costs"},
      {"[overhead]\nworking_sets = 12Q\n", 2, "overhead.working_sets"},
      {"[stats]\nshuffles = 1\n", 2, "stats.shuffles"},
      {"[stats]\nz = 1\nz = 2\n", 3, "stats.z"},
      {"[stats]\n[stats]\n", 2, "stats"},
      {"[stats]\nz\n", 2, ""},
  };
  for (const Case& c : cases) {
    const ConfigError e = config_error(c.text);
    EXPECT_EQ(e.code(), Errc::config_error);
    EXPECT_EQ(e.line(), c.line) << c.text;
    EXPECT_EQ(e.key(), c.key) << c.text;
  }
  const ConfigError e = config_error("[switch]\nfoo = 1\n");
  EXPECT_STREQ(e.what(), "ConfigError: line 2: key 'switch.foo': unknown key");
}

TEST(Config, OverlappingColoursAreRejected) {
  const ConfigError e = config_error("[domains]\nreceiver_colours = 0-4\nsender_colours = 4-7\n");
  EXPECT_EQ(e.line(), 3);
  EXPECT_EQ(e.key(), "domains.sender_colours");
  const ConfigError range = config_error("[domains]\nreceiver_colours = 0-8\n");
  EXPECT_EQ(range.key(), "domains.receiver_colours");
  EXPECT_NO_THROW(parse_config("[platform]\nprofile = sabre\n[domains]\nreceiver_colours = 0-8\n"));
}

TEST(Config, ColourListsRoundTrip) {
  EXPECT_EQ(parse_colour_list("0-3, 8, 10-11"), (ColourSet{0, 1, 2, 3, 8, 10, 11}));
  EXPECT_EQ(format_colour_list({0, 1, 2, 3, 8, 10, 11}), "0-3,8,10-11");
  EXPECT_EQ(format_colour_list({}), "");
  EXPECT_THROW(parse_colour_list("3-1"), Error);
  EXPECT_THROW(parse_colour_list("x"), Error);
}

TEST(Config, BuiltinsMatchShippedFiles) {
  const std::filesystem::path dir = std::filesystem::path(TPSIM_SOURCE_DIR) / "configs";
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".ini") continue;
    ++files;
    std::ifstream in(entry.path());
    std::stringstream text;
    text << in.rdbuf();
    EXPECT_EQ(builtin_config_text(entry.path().stem().string()), text.str()) << entry.path();
  }
  EXPECT_EQ(builtin_config_names().size(), files);
  EXPECT_GE(files, 11u);
  for (const std::string& name : builtin_config_names()) {
    EXPECT_NO_THROW(resolve_config(name)) << name;
    EXPECT_EQ(resolve_config(name).name, name);
  }
  EXPECT_TRUE(builtin_config_text("no-such-config").empty());
  EXPECT_THROW(resolve_config("no-such-config"), Error);
}

TEST(Config, LoadsFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "tpsim_config_test.ini";
  {
    std::ofstream out(path);
    out << "[channels]\nlist = kernel\niterations = 16\n";
  }
  const ScenarioConfig c = resolve_config(path.string());
  EXPECT_EQ(c.iterations, 16u);
  EXPECT_EQ(c.name, "tpsim_config_test");
  std::filesystem::remove(path);
  EXPECT_THROW(load_config_file(path.string()), Error);
}

}  // namespace
}  // namespace tpsim
