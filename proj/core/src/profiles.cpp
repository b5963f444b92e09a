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

#include "tpsim/profiles.hpp"

#include "tpsim/error.hpp"

namespace tpsim {

namespace {

constexpr std::uint64_t KiB = 1024;
constexpr std::uint64_t MiB = 1024 * KiB;

Latency lat(Cycles hit, Cycles miss, Cycles wb, Cycles flush) { return Latency{hit, miss, wb, flush}; }

}  // namespace

PlatformProfile haswell_profile() {
  PlatformProfile p;
  p.name = "haswell";
  p.description = "x86 Haswell Core i7-4700, 4 cores, 3.4 GHz";
  p.clock_ghz = 3.4;
  p.cores = 4;
  p.page_bytes = 4 * KiB;
  p.memory_frames = 16384;
  p.boot_frames = 64;
  p.l1d = CacheGeometry::make("L1-D", 32 * KiB, 8, 64, Indexing::virt);
  p.l1i = CacheGeometry::make("L1-I", 32 * KiB, 8, 64, Indexing::virt);
  p.unified = {CacheGeometry::make("L2", 256 * KiB, 8, 64, Indexing::physical),
               CacheGeometry::make("L3", 8 * MiB, 16, 64, Indexing::physical)};
  p.first_shared = 1;
  p.dtlb = CacheGeometry::make("DTLB", 64 * p.page_bytes, 4, p.page_bytes, Indexing::virt);
  p.itlb = CacheGeometry::make("ITLB", 64 * p.page_bytes, 8, p.page_bytes, Indexing::virt);
  p.stlb = CacheGeometry::make("STLB", 1024 * p.page_bytes, 8, p.page_bytes, Indexing::virt);
  p.btb = CacheGeometry::make("BTB", 4096 * 4, 4, 4, Indexing::virt);
  p.bhb_history_bits = 12;
  p.io_ports = true;
  p.latency.defaults = lat(1, 10, 0, 0);
  p.latency.overrides = {
      {"L1-D", lat(4, 12, 4, 1200)},
      {"L1-I", lat(4, 12, 0, 60000)},
      {"L2", lat(12, 40, 6, 20000)},
      {"L3", lat(40, 200, 20, 800000)},
      {"DTLB", lat(1, 8, 0, 100)},
      {"ITLB", lat(1, 8, 0, 100)},
      {"STLB", lat(8, 40, 0, 200)},
      {"BTB", lat(1, 20, 0, 2000)},
      {"BHB", lat(1, 20, 0, 500)},
  };
  p.partitioned_cache = "L2";
  p.validate();
  return p;
}

PlatformProfile sabre_profile() {
  PlatformProfile p;
  p.name = "sabre";
  p.description = "Arm Cortex A9 i.MX 6Q, 4 cores, 0.8 GHz";
  p.clock_ghz = 0.8;
  p.cores = 4;
  p.page_bytes = 4 * KiB;
  p.memory_frames = 16384;
  p.boot_frames = 32;
  p.l1d = CacheGeometry::make("L1-D", 32 * KiB, 4, 32, Indexing::virt);
  p.l1i = CacheGeometry::make("L1-I", 32 * KiB, 4, 32, Indexing::virt);
  p.unified = {CacheGeometry::make("L2", 1 * MiB, 16, 32, Indexing::physical)};
  p.first_shared = 0;
  p.dtlb = CacheGeometry::make("DTLB", 32 * p.page_bytes, 1, p.page_bytes, Indexing::virt);
  p.itlb = CacheGeometry::make("ITLB", 32 * p.page_bytes, 1, p.page_bytes, Indexing::virt);
  p.stlb = CacheGeometry::make("STLB", 128 * p.page_bytes, 2, p.page_bytes, Indexing::virt);
  p.btb = CacheGeometry::make("BTB", 512 * 4, 2, 4, Indexing::virt);
  p.bhb_history_bits = 8;
  p.latency.defaults = lat(1, 10, 0, 0);
  p.latency.overrides = {
      {"L1-D", lat(4, 25, 4, 3000)},
      {"L1-I", lat(4, 25, 0, 1000)},
      {"L2", lat(25, 120, 12, 250000)},
      {"DTLB", lat(1, 10, 0, 100)},
      {"ITLB", lat(1, 10, 0, 100)},
      {"STLB", lat(10, 60, 0, 200)},
      {"BTB", lat(1, 12, 0, 500)},
      {"BHB", lat(1, 12, 0, 200)},
  };
  p.partitioned_cache = "L2";
  p.layout = KernelLayout{18, 4, 6, 2};
  p.validate();
  return p;
}

std::vector<std::string> builtin_profile_names() { return {"haswell", "sabre"}; }

PlatformProfile builtin_profile(std::string_view name) {
  if (name == "haswell") return haswell_profile();
  if (name == "sabre") return sabre_profile();
  throw Error(Errc::invalid_argument, "unknown platform profile '" + std::string(name) + "'");
}

}  // namespace tpsim
