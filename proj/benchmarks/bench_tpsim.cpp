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


#include <benchmark/benchmark.h>

#include "tpsim/channels.hpp"
#include "tpsim/kernel.hpp"
#include "tpsim/leakage.hpp"
#include "tpsim/machine.hpp"
#include "tpsim/profiles.hpp"
#include "tpsim/random.hpp"

namespace {

using namespace tpsim;

void BM_MachineAccess(benchmark::State& state) {
  Machine m(haswell_profile());
  Rng rng(1);
  const std::uint64_t span = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    const std::uint64_t a = rng.below(span);
    benchmark::DoNotOptimize(m.access(0, DomainId{0}, Address{a, a}, AccessKind::read));
  }
}
BENCHMARK(BM_MachineAccess)->Arg(16 << 10)->Arg(1 << 20)->Arg(64 << 20);

void BM_EstimateMi(benchmark::State& state) {
  SampleSet s;
  s.alphabet = {"0", "1", "2", "3"};
  Rng rng(2);
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    const auto x = static_cast<std::uint32_t>(i % 4);
    const double y = x + rng.normal();
    s.add(x, y, y);
  }
  for (auto _ : state) benchmark::DoNotOptimize(estimate_mi(s));
}
BENCHMARK(BM_EstimateMi)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ProtectedSwitch(benchmark::State& state) {
  TwoDomainOptions opt;
  System sys = make_scenario_system(haswell_profile(), Scenario::protected_, opt);
  for (auto _ : state) benchmark::DoNotOptimize(sys.preempt(0));
}
BENCHMARK(BM_ProtectedSwitch)->Unit(benchmark::kMicrosecond);

void BM_PrimeProbeIteration(benchmark::State& state) {
  ChannelSpec spec;
  spec.resource = static_cast<Resource>(state.range(0));
  spec.iterations = 16;
  const PlatformProfile p = haswell_profile();
  for (auto _ : state) benchmark::DoNotOptimize(run_prime_probe(p, spec));
  state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_PrimeProbeIteration)
    ->Arg(static_cast<int>(Resource::l1d))
    ->Arg(static_cast<int>(Resource::l2))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
