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


// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tpsim/channels.hpp"
#include "tpsim/colouring.hpp"
#include "tpsim/config.hpp"
#include "tpsim/harness.hpp"
#include "tpsim/kernel.hpp"
#include "tpsim/leakage.hpp"
#include "tpsim/profiles.hpp"
#include "tpsim/random.hpp"

namespace {

using namespace tpsim;

// Pinned tolerances and limits.
constexpr double kOracleTolBits = 0.02;
constexpr std::size_t kOracleN = 10'000;
constexpr double kOracleSeconds = 30;
constexpr double kEndpointTolBits = 0.01;
constexpr int kNullDatasets = 100;
constexpr int kNullMinNoLeak = 95;
constexpr std::size_t kNullN = 1000;
constexpr double kKernelMarginBits = 0.1;
constexpr std::size_t kKernelIterations = 5000;
constexpr double kKernelSeconds = 60;
constexpr double kPrimeProbeSeconds = 300;
constexpr double kInterruptSdFraction = 0.4;
constexpr double kRawKeyRecovery = 0.9;
constexpr double kProtectedKeyRecovery = 0.5;
constexpr double kProtectedKeyTol = 0.05;
constexpr std::uint64_t kMaxPoolFrames = 4096;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Check {
  bool pass = true;
  std::ostringstream why;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (!pass) why << "; ";
      why << what;
      pass = false;
    }
  }
};

struct Run {
  ScenarioReport report;
  double seconds = 0;
};

std::map<std::string, Run>& runs() {
  static std::map<std::string, Run> r;
  return r;
}

const Run& run_builtin(const std::string& name) {
  auto it = runs().find(name);
  if (it != runs().end()) return it->second;
  const auto t0 = Clock::now();
  Run r;
  r.report = run_scenario(resolve_config(name));
  r.seconds = seconds_since(t0);
  return runs().emplace(name, std::move(r)).first->second;
}

const ChannelCell& cell(const ScenarioReport& r, const std::string& channel, Scenario s) {
  const ChannelCell* c = r.find(channel, s);
  if (!c || !c->applicable || (!c->verdict && !c->side)) {
    throw std::runtime_error(r.config_name + ": no result for " + channel + "/" + std::string(to_string(s)));
  }
  return *c;
}

double m_bits(const ChannelCell& c) { return c.verdict->m.value_bits; }
double m0_bits(const ChannelCell& c) { return c.verdict->m0.bound_bits; }

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double sample_sd(const std::vector<double>& v) {
  double m = 0, ss = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

SampleSet gaussian_set(const std::vector<double>& means, double sd, std::size_t n, std::uint64_t seed) {
  SampleSet s;
  for (std::size_t i = 0; i < means.size(); ++i) s.alphabet.push_back(std::to_string(i));
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = static_cast<std::uint32_t>(i % means.size());
    const double y = means[x] + sd * rng.normal();
    s.add(x, y, y);
  }
  return s;
}

// 1: estimate_mi vs a quadrature oracle on Gaussian mixtures.
Check mi_oracle() {
  Check c;
  double estimator_seconds = 0, worst = 0;
  int cases = 0;
  for (std::size_t k = 2; k <= 4; ++k) {
    for (double sep : {0.5, 1.0, 2.0, 4.0}) {
      std::vector<double> means;
      for (std::size_t i = 0; i < k; ++i) means.push_back(sep * static_cast<double>(i));
      const SampleSet s = gaussian_set(means, 1.0, kOracleN, 1000 + cases++);
      const auto t0 = Clock::now();
      const double est = estimate_mi(s).value_bits;
      estimator_seconds += seconds_since(t0);
      const double truth = oracle::mixture_mi(means, 1.0);
      worst = std::max(worst, std::abs(est - truth));
      c.require(std::abs(est - truth) <= kOracleTolBits,
                fmt("k=%.0f sep=%.1f: |%.4f - oracle| > tol", static_cast<double>(k), sep, est) +
                    fmt(" (oracle %.4f)", truth));
    }
  }
  c.require(estimator_seconds < kOracleSeconds, fmt("estimator took %.1f s", estimator_seconds));
  if (c.pass) c.why << cases << " datasets, max |error| " << fmt("%.4f", worst) << " bits, " << fmt("%.2f s", estimator_seconds);
  return c;
}

// 2: constant channel and disjoint-support binary channel.
Check endpoints() {
  Check c;
  SampleSet constant;
  constant.alphabet = {"a", "b", "c", "d"};
  for (std::uint32_t i = 0; i < 1000; ++i) constant.add(i % 4, 7.0, 7.0);
  const double zero = estimate_mi(constant).value_bits;
  c.require(zero == 0.0, fmt("constant channel M = %g", zero));
  SampleSet binary;
  binary.alphabet = {"0", "1"};
  Rng rng(3);
  for (std::uint32_t i = 0; i < 2000; ++i) {
    const double y = 1000.0 * (i % 2) + rng.uniform();
    binary.add(i % 2, y, y);
  }
  const double one = estimate_mi(binary).value_bits;
  c.require(std::abs(one - 1.0) <= kEndpointTolBits, fmt("binary channel M = %.4f", one));
  if (c.pass) c.why << fmt("M(constant) = %g, M(binary) = %.4f", zero, one);
  return c;
}

// 3: null datasets should come out "no leak" at the bound's design rate.
Check zero_leakage_calibration() {
  Check c;
  int no_leak = 0;
  for (int d = 0; d < kNullDatasets; ++d) {
    SampleSet s;
    s.alphabet = {"0", "1", "2", "3"};
    Rng rng(mix_seed(77, static_cast<std::uint64_t>(d)));
    for (std::size_t i = 0; i < kNullN; ++i) {
      const double y = rng.normal();
      s.add(static_cast<std::uint32_t>(rng.below(4)), y, y);
    }
    StatsConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(d) + 1;
    no_leak += !leak_verdict(s, cfg).leak;
  }
  c.require(no_leak >= kNullMinNoLeak, std::to_string(no_leak) + "/100 no-leak");
  if (c.pass) c.why << no_leak << "/" << kNullDatasets << " no-leak verdicts";
  return c;
}

// 4: S / (w P) for the geometries that define the profiles.
Check colour_arithmetic() {
  Check c;
  const PlatformProfile h = haswell_profile(), s = sabre_profile();
  struct Row {
    const char* what;
    const CacheGeometry& g;
    std::uint64_t size, ways, page, expected;
  };
  const Row rows[] = {
      {"x86 L1-D", h.l1d, 32 << 10, 8, 4096, 1},
      {"x86 L2", h.unified[0], 256 << 10, 8, 4096, 8}, {"x86 LLC", h.unified.back(), 8 << 20, 16, 4096, 128},
      {"Arm L2", s.unified[0], 1 << 20, 16, 4096, 16},
  };
  for (const Row& r : rows) {
    c.require(r.g.size_bytes == r.size && r.g.ways == r.ways, std::string(r.what) + " geometry differs");
    const std::uint64_t derived = r.size / (r.ways * r.page);
    c.require(derived == r.expected, std::string(r.what) + " arithmetic");
    c.require(colour_count(r.g, h.page_bytes) == derived,
              std::string(r.what) + ": colour_count " + std::to_string(colour_count(r.g, h.page_bytes)));
  }
  if (c.pass) c.why << "L1 1 (x86), x86 L2 8, x86 LLC 128, Arm L2 16";
  return c;
}

void require_raw_leaks_protected_not(Check& c, const ScenarioReport& r, const std::string& ch,
                                     bool with_full_flush, double margin = 0) {
  const ChannelCell& raw = cell(r, ch, Scenario::raw);
  c.require(m_bits(raw) > m0_bits(raw) + margin,
            r.config_name + " " + ch + fmt(" raw M %.4f vs M0 %.4f", m_bits(raw), m0_bits(raw)));
  std::vector<Scenario> mitigated{Scenario::protected_};
  if (with_full_flush) mitigated.push_back(Scenario::full_flush);
  for (Scenario s : mitigated) {
    const ChannelCell& m = cell(r, ch, s);
    c.require(m_bits(m) <= m0_bits(m), r.config_name + " " + ch + " " + std::string(to_string(s)) +
                                           fmt(" M %.4f > M0 %.4f", m_bits(m), m0_bits(m)));
  }
}

// 5: kernel-image channel.
Check kernel_channel() {
  Check c;
  for (const char* name : {"haswell-kernel-channel", "sabre-kernel-channel"}) {
    const Run& run = run_builtin(name);
    const ChannelCell& raw = cell(run.report, "kernel", Scenario::raw);
    c.require(raw.samples->size() == kKernelIterations, std::string(name) + " ran " + std::to_string(raw.samples->size()));
    require_raw_leaks_protected_not(c, run.report, "kernel", false, kKernelMarginBits);
    c.require(run.seconds < kKernelSeconds, std::string(name) + fmt(" took %.1f s", run.seconds));
    if (c.pass) {
      const ChannelCell& prot = cell(run.report, "kernel", Scenario::protected_);
      c.why << name << fmt(": raw M %.3f M0 %.3f, protected", m_bits(raw), m0_bits(raw))
            << fmt(" M %.4f M0 %.4f", m_bits(prot), m0_bits(prot)) << fmt(", %.1f s; ", run.seconds);
    }
  }
  return c;
}

// 6: intra-core prime&probe grid.
Check prime_probe_suite() {
  Check c;
  double total = 0;
  for (const char* name : {"haswell-prime-probe", "sabre-prime-probe"}) {
    const Run& run = run_builtin(name);
    total += run.seconds;
    for (const ChannelRequest& req : resolve_config(name).channels) {
      require_raw_leaks_protected_not(c, run.report, req.label(), true);
    }
  }
  c.require(total < kPrimeProbeSeconds, fmt("grid took %.1f s", total));
  if (c.pass) c.why << "6 resources x 2 profiles, " << fmt("%.1f s", total);
  return c;
}

// 7: flush-latency channel.
Check flush_latency() {
  Check c;
  for (const char* name : {"haswell-flush-latency", "sabre-flush-latency"}) {
    const ScenarioReport& r = run_builtin(name).report;
    const std::string ch = "flush_latency/offline";
    const ChannelCell& raw = cell(r, ch, Scenario::raw);
    c.require(m_bits(raw) > m0_bits(raw), std::string(name) + fmt(" raw M %.4f vs M0 %.4f", m_bits(raw), m0_bits(raw)));
    for (std::size_t i = 1; i < raw.inputs.size(); ++i) {
      c.require(raw.inputs[i].clean_mean > raw.inputs[i - 1].clean_mean,
                std::string(name) + " offline time not increasing at k=" + raw.inputs[i].label);
    }
    const ChannelCell& pad = cell(r, ch, Scenario::protected_);
    c.require(m_bits(pad) <= m0_bits(pad), std::string(name) + fmt(" padded M %.4f > M0 %.4f", m_bits(pad), m0_bits(pad)));
    std::set<double> clean(pad.samples->clean.begin(), pad.samples->clean.end());
    c.require(clean.size() == 1, std::string(name) + " padded offline time varies");
  }
  if (c.pass) c.why << "both profiles: raw monotone and leaking, padded constant";
  return c;
}

// 8: interrupt channel.
Check interrupt_channel() {
  Check c;
  for (const char* name : {"haswell-interrupt", "sabre-interrupt"}) {
    const ScenarioConfig cfg = resolve_config(name);
    const ScenarioReport& r = run_builtin(name).report;
    const double slice = static_cast<double>(*cfg.timeslice_us) *
                         static_cast<double>(cycles_per_ms(builtin_profile(cfg.profile))) / 1000.0;
    const ChannelCell& raw = cell(r, "interrupt", Scenario::raw);
    const auto yes = raw.samples->outputs_of(1, true);
    const double sd = sample_sd(yes);
    c.require(sd >= kInterruptSdFraction * slice, std::string(name) + fmt(" yes sd %.0f < %.0f", sd, kInterruptSdFraction * slice));
    const ChannelCell& part = cell(r, "interrupt", Scenario::protected_);
    std::set<double> clean(part.samples->clean.begin(), part.samples->clean.end());
    c.require(clean.size() == 1, std::string(name) + " partitioned online time varies");
    c.require(m_bits(part) <= m0_bits(part), std::string(name) + fmt(" partitioned M %.4f > M0 %.4f", m_bits(part), m0_bits(part)));
    if (c.pass) c.why << name << fmt(": yes sd %.2f slices; ", sd / slice);
  }
  return c;
}

// 9: LLC side channel.
Check llc_side_channel() {
  Check c;
  const ScenarioReport& r = run_builtin("haswell-llc-side").report;
  const ChannelCell& raw = cell(r, "llc_side", Scenario::raw);
  const ChannelCell& prot = cell(r, "llc_side", Scenario::protected_);
  c.require(raw.side->key.size() == 64, "key is not 64 bits");
  c.require(raw.side->accuracy >= kRawKeyRecovery, fmt("raw recovery %.3f", raw.side->accuracy));
  c.require(std::abs(prot.side->accuracy - kProtectedKeyRecovery) <= kProtectedKeyTol,
            fmt("protected recovery %.3f", prot.side->accuracy));
  if (c.pass) c.why << fmt("raw %.1f%%, protected %.1f%%", 100 * raw.side->accuracy, 100 * prot.side->accuracy);
  return c;
}

// 10: switch cost table.
Check switch_costs() {
  Check c;
  for (const char* name : {"haswell-switch-cost", "sabre-switch-cost"}) {
    const ScenarioReport& r = run_builtin(name).report;
    const SwitchCostTable* flush = nullptr;
    const SwitchCostTable* prot = nullptr;
    for (const SwitchCostTable& t : r.switch_costs) {
      if (t.scenario == Scenario::full_flush) flush = &t;
      if (t.scenario == Scenario::protected_) prot = &t;
    }
    c.require(flush && prot, std::string(name) + " lacks a table");
    if (!flush || !prot) continue;
    std::set<Cycles> distinct;
    for (std::size_t i = 0; i < prot->rows.size(); ++i) {
      distinct.insert(prot->rows[i].cycles);
      c.require(prot->rows[i].cycles < flush->rows[i].cycles, std::string(name) + " " + prot->rows[i].workload +
                                                                  ": protected not below full_flush");
    }
    c.require(distinct.size() == 1, std::string(name) + " protected cost depends on the workload");
    if (c.pass) {
      c.why << name << ": protected " << *distinct.begin() << " cycles, full_flush";
      for (const SwitchCostRow& row : flush->rows) c.why << " " << row.cycles;
      c.why << "; ";
    }
  }
  return c;
}

// 11: same config and seed, same bytes.
Check determinism() {
  Check c;
  for (const std::string& name : builtin_config_names()) {
    const std::string first = run_builtin(name).report.json;
    const std::string second = run_scenario(resolve_config(name)).json;
    c.require(first == second, name + " differs between runs");
  }
  if (c.pass) c.why << builtin_config_names().size() << " built-in configs byte-identical";
  return c;
}

// 12: invariants as randomized properties.
Check invariants() {
  Check c;
  // Colour disjointness, brute force over every frame pair of a pool.
  for (const std::string& pname : builtin_profile_names()) {
    const PlatformProfile p = builtin_profile(pname);
    const auto count = static_cast<std::uint32_t>(colour_count(p.partitioned(), p.page_bytes));
    const auto split = split_colours(count, {0.25, 0.25, 0.5});
    const auto frames = make_frames(p.boot_frames, kMaxPoolFrames, p.partitioned(), p.page_bytes);
    std::map<DomainId, ColourSet> assign{{DomainId{0}, split[0]}, {DomainId{1}, split[1]}, {DomainId{2}, split[2]}};
    const ColourPartition part = partition_pool(frames, assign);
    const Cache cache(p.partitioned(), Latency{}, p.page_bytes);
    std::vector<std::pair<DomainId, std::set<std::uint64_t>>> sets;
    for (const auto& [d, cs] : assign) {
      std::set<std::uint64_t> s;
      for (const Frame& f : part.pool_of(d)) {
        for (std::uint64_t o = 0; o < p.page_bytes; o += p.partitioned().line_bytes) s.insert(cache.set_index(f.phys_addr + o));
      }
      sets.emplace_back(d, std::move(s));
    }
    for (std::size_t i = 0; i < sets.size(); ++i) {
      for (std::size_t j = i + 1; j < sets.size(); ++j) {
        for (std::uint64_t s : sets[i].second) c.require(!sets[j].second.count(s), pname + ": pools share a set");
      }
    }
  }

  // Flush idempotence and history erasure.
  for (const std::string& pname : builtin_profile_names()) {
    const PlatformProfile p = builtin_profile(pname);
    Machine a(p), b(p);
    Rng rng(5);
    for (int i = 0; i < 20000; ++i) {
      const std::uint64_t x = rng.below(1ULL << 22);
      a.access(0, DomainId{0}, Address{x, x}, AccessKind::write);
      a.branch(0, DomainId{0}, x & ~3ULL, rng.below(2) == 1);
    }
    for (Resource r : {Resource::l1d, Resource::l1i, Resource::tlb, Resource::btb, Resource::bhb}) {
      a.flush(0, r);
      b.flush(0, r);
      Machine again = a;
      again.flush(0, r);
      c.require(again.same_core_state(0, a), pname + ": flush of " + std::string(to_string(r)) + " not idempotent");
    }
    if (p.first_shared > 0) {
      a.flush(0, Resource::l2);
      b.flush(0, Resource::l2);
    }
    c.require(a.same_core_state(0, b), pname + ": on-core flush leaves history");
  }

  // IRQ-mask subset invariant after every operation, and at every logged mask change.
  {
    const PlatformProfile p = haswell_profile();
    const auto count = static_cast<std::uint32_t>(colour_count(p.partitioned(), p.page_bytes));
    const auto split = split_colours(count, {0.5, 0.5});
    System sys(p, {{"a", split[0], 1'000'000, 0}, {"b", split[1], 1'000'000, 0}});
    const ImageId ia = sys.clone_kernel(sys.initial_image(), DomainId{0});
    const ImageId ib = sys.clone_kernel(sys.initial_image(), DomainId{1});
    sys.set_switch_config(scenario_switch_config(sys, Scenario::protected_, true));
    std::vector<IrqId> irqs;
    std::map<IrqId, ImageId> owner;
    for (int i = 0; i < 4; ++i) {
      irqs.push_back(sys.create_irq(0));
      owner[irqs.back()] = i % 2 ? ib : ia;
      sys.set_irq_owner(irqs.back(), owner[irqs.back()]);
    }
    sys.clear_mask_log();
    Rng rng(9);
    for (int step = 0; step < 5000; ++step) {
      const IrqId irq = irqs[rng.below(irqs.size())];
      switch (rng.below(5)) {
        case 0: sys.preempt(0); break;
        case 1: sys.arm_irq(irq, sys.now(0) + rng.below(300000), rng.below(2) * 100000); break;
        case 2: sys.ack_irq(irq); break;
        default: {
          const RunEvent e = sys.run_until(0, std::min(sys.deadline(0), sys.now(0) + rng.below(500000)));
          if (e.irq) c.require(owner[*e.irq] == sys.current_image(0), "interrupt delivered to a non-owner");
        }
      }
      for (IrqId id : irqs) {
        if (sys.irq_unmasked(id)) c.require(owner[id] == sys.current_image(0), "unmasked IRQ not owned by current image");
      }
    }
    c.require(!sys.mask_log().empty(), "no mask changes logged");
    for (const MaskSnapshot& m : sys.mask_log()) {
      for (IrqId id : m.unmasked) c.require(owner[id] == m.current_image, "logged unmasked IRQ not owned");
    }
  }

  // Frame conservation through clone/destroy round trips.
  {
    const PlatformProfile p = sabre_profile();
    const auto count = static_cast<std::uint32_t>(colour_count(p.partitioned(), p.page_bytes));
    const auto split = split_colours(count, {0.5, 0.5});
    System sys(p, {{"a", split[0], 1'000'000, 0}, {"b", split[1], 1'000'000, 0}});
    const std::size_t total = sys.partition().available(DomainId{0}) + sys.partition().available(DomainId{1});
    Rng rng(11);
    std::vector<ImageId> live;
    for (int step = 0; step < 500; ++step) {
      if (live.size() < 8 && (live.empty() || rng.below(2) == 0)) {
        live.push_back(sys.clone_kernel(sys.initial_image(), DomainId{static_cast<std::uint32_t>(rng.below(2))}));
      } else {
        const std::size_t i = rng.below(live.size());
        sys.destroy_kernel(live[i]);
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
      }
      std::size_t held = 0;
      for (ImageId id : live) held += sys.image(id).frames.size();
      c.require(held + sys.partition().available(DomainId{0}) + sys.partition().available(DomainId{1}) == total,
                "frames lost through clone/destroy");
    }
  }
  if (c.pass) c.why << "colour disjointness, flush erasure, IRQ masks, frame conservation";
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
      {"MI oracle equivalence", mi_oracle},
      {"analytic endpoints", endpoints},
      {"zero-leakage calibration", zero_leakage_calibration},
      {"colour arithmetic", colour_arithmetic},
      {"kernel-image channel", kernel_channel},
      {"intra-core prime&probe suite", prime_probe_suite},
      {"flush-latency channel", flush_latency},
      {"interrupt channel", interrupt_channel},
      {"LLC side channel", llc_side_channel},
      {"switch-cost table", switch_costs},
      {"determinism", determinism},
      {"invariant suite", invariants},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Check c;
    try {
      c = criteria[i].second();
    } catch (const std::exception& e) {
      c.pass = false;
      c.why << "exception: " << e.what();
    }
    failed += !c.pass;
    std::printf("criterion %2zu: %s  %s (%s) [%.1f s]\n", i + 1, c.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                c.why.str().c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
