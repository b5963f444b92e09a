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

#include "tpsim/channels.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "tpsim/random.hpp"

namespace tpsim {

namespace {

constexpr std::uint64_t kRecvData = 0x1000'0000;
constexpr std::uint64_t kSendData = 0x2000'0000;
constexpr std::uint64_t kRecvCode = 0x3000'0000;
constexpr std::uint64_t kSendCode = 0x4000'0000;
constexpr std::uint64_t kRecvBranch = 0x5000'0000;
constexpr std::uint64_t kSendBranch = 0x6000'0000;
constexpr std::uint64_t kAliasBranch = 0x7000'0040;

// Streams derived from the channel seed.
enum Stream : std::uint64_t { kSchedule, kNoise, kKey, kPhase };

class Noise {
 public:
  Noise(std::uint64_t seed, double sigma) : rng_(mix_seed(seed, kNoise)), sigma_(sigma) {}
  double operator()(double clean) { return sigma_ > 0 ? clean + sigma_ * rng_.normal() : clean; }

 private:
  Rng rng_;
  double sigma_;
};

std::vector<std::uint32_t> draw_schedule(const ChannelSpec& spec, std::size_t alphabet) {
  if (spec.iterations == 0) throw Error(Errc::invalid_argument, "a channel needs at least one iteration");
  for (std::uint32_t s : spec.symbols) {
    if (s >= alphabet) throw Error(Errc::invalid_argument, "symbol index outside the alphabet");
  }
  Rng rng(mix_seed(spec.seed, kSchedule));
  std::vector<std::uint32_t> out(spec.iterations);
  for (auto& s : out) {
    s = spec.symbols.empty() ? static_cast<std::uint32_t>(rng.below(alphabet))
                             : spec.symbols[rng.below(spec.symbols.size())];
  }
  return out;
}

std::vector<std::uint64_t> stepped(std::uint64_t max, std::uint64_t steps) {
  const std::uint64_t step = std::max<std::uint64_t>(1, max / steps);
  std::vector<std::uint64_t> v;
  for (std::uint64_t x = 0; x <= max; x += step) v.push_back(x);
  return v;
}

std::vector<std::uint64_t> alphabet_values(const PlatformProfile& p, const ChannelSpec& spec) {
  switch (spec.kind) {
    case ChannelKind::prime_probe:
      switch (spec.resource) {
        case Resource::l1d: return stepped(p.l1d.sets(), 8);
        case Resource::l1i: return stepped(p.l1i.sets(), 8);
        case Resource::l2: return stepped(colour_count(p.unified.front(), p.page_bytes), 8);
        case Resource::tlb: return stepped(p.dtlb.sets(), 8);
        case Resource::btb: return stepped(p.btb.sets(), 8);
        case Resource::bhb: return {0, 1};
        case Resource::llc: break;
      }
      throw Error(Errc::invalid_argument, "no intra-core prime&probe channel on the LLC");
    case ChannelKind::kernel_image: return {0, 1, 2, 3};
    case ChannelKind::flush_latency: return stepped(p.l1d.lines(), 8);
    case ChannelKind::interrupt: return {0, 1};
    case ChannelKind::llc_side: return {0, 1};
  }
  return {};
}

void require_support(const ChannelSpec& spec) {
  if (!channel_supports(spec.kind, spec.scenario)) {
    throw Error(Errc::invalid_argument, std::string(to_string(spec.kind)) + " has no " +
                                            std::string(to_string(spec.scenario)) + " scenario");
  }
}

SampleSet empty_set(const PlatformProfile& p, const ChannelSpec& spec) {
  SampleSet s;
  s.channel = std::string(to_string(spec.kind));
  if (spec.kind == ChannelKind::prime_probe) s.channel += "/" + std::string(to_string(spec.resource));
  s.channel += "/" + std::string(to_string(spec.scenario));
  s.alphabet = channel_alphabet(p, spec);
  return s;
}

// Receiver probe and sender footprint of one intra-core channel.
struct PrimeProbe {
  std::function<double()> probe;
  std::function<void(std::uint64_t)> send;
};

PrimeProbe make_prime_probe(System& sys, Resource r) {
  const PlatformProfile& p = sys.profile();
  PrimeProbe pp;
  switch (r) {
    case Resource::l1d:
    case Resource::l1i: {
      const CacheGeometry& g = r == Resource::l1d ? p.l1d : p.l1i;
      const AccessKind kind = r == Resource::l1d ? AccessKind::read : AccessKind::ifetch;
      const std::uint64_t recv = r == Resource::l1d ? kRecvData : kRecvCode;
      const std::uint64_t send = r == Resource::l1d ? kSendData : kSendCode;
      pp.probe = [&sys, g, kind, recv] {
        double t = 0;
        for (std::uint64_t i = 0; i < g.lines(); ++i) t += static_cast<double>(sys.load(0, recv + i * g.line_bytes, kind));
        return t;
      };
      pp.send = [&sys, g, kind, send](std::uint64_t sets) {
        for (std::uint64_t set = 0; set < sets; ++set) {
          for (std::uint64_t w = 0; w < g.ways; ++w) sys.load(0, send + (w * g.sets() + set) * g.line_bytes, kind);
        }
      };
      return pp;
    }
    case Resource::l2: {
      const CacheGeometry& g = p.unified.front();
      const std::uint64_t colours = colour_count(g, p.page_bytes);
      const std::uint64_t page = p.page_bytes;
      const std::uint64_t l2_pages = g.size_bytes / page;
      const std::size_t recv_colours = sys.domain(kReceiver).colours.size();
      const std::uint64_t recv_pages = recv_colours == 0 ? l2_pages : l2_pages * recv_colours / colours;
      pp.probe = [&sys, g, page, recv_pages] {
        double t = 0;
        for (std::uint64_t a = 0; a < recv_pages * page; a += g.line_bytes) {
          t += static_cast<double>(sys.load(0, kRecvData + a, AccessKind::read));
        }
        return t;
      };
      pp.send = [&sys, g, page, l2_pages, colours](std::uint64_t n) {
        for (std::uint64_t pg = 0; pg < l2_pages; ++pg) {
          const std::uint64_t base = kSendData + pg * page;
          if ((sys.physical(kSender, base) / page) % colours >= n) continue;
          for (std::uint64_t a = 0; a < page; a += g.line_bytes) sys.load(0, base + a, AccessKind::read);
        }
      };
      return pp;
    }
    case Resource::tlb: {
      const std::uint64_t entries = p.dtlb.lines();
      const std::uint64_t page = p.page_bytes;
      const std::uint64_t line = p.l1d.line_bytes;
      pp.probe = [&sys, entries, page, line] {
        double t = 0;
        for (std::uint64_t i = 0; i < entries; ++i) {
          t += static_cast<double>(sys.load(0, kRecvData + i * page + (i * line) % page, AccessKind::read));
        }
        return t;
      };
      const CacheGeometry g = p.dtlb;
      pp.send = [&sys, g, page, line](std::uint64_t sets) {
        for (std::uint64_t set = 0; set < sets; ++set) {
          for (std::uint64_t w = 0; w < g.ways; ++w) {
            const std::uint64_t i = w * g.sets() + set;
            sys.load(0, kSendData + i * page + (i * line) % page, AccessKind::read);
          }
        }
      };
      return pp;
    }
    case Resource::btb: {
      const CacheGeometry g = p.btb;
      pp.probe = [&sys, g] {
        double t = 0;
        for (std::uint64_t i = 0; i < g.lines(); ++i) {
          t += static_cast<double>(sys.branch(0, kRecvBranch + i * g.line_bytes, true));
        }
        return t;
      };
      pp.send = [&sys, g](std::uint64_t sets) {
        for (std::uint64_t set = 0; set < sets; ++set) {
          for (std::uint64_t w = 0; w < g.ways; ++w) sys.branch(0, kSendBranch + (w * g.sets() + set) * g.line_bytes, true);
        }
      };
      return pp;
    }
    case Resource::bhb: {
      const unsigned repeats = p.bhb_history_bits + 4;
      pp.probe = [&sys] { return static_cast<double>(sys.branch(0, kAliasBranch, true)); };
      pp.send = [&sys, repeats](std::uint64_t taken) {
        for (unsigned i = 0; i < repeats; ++i) sys.branch(0, kAliasBranch, taken != 0);
      };
      return pp;
    }
    case Resource::llc: break;
  }
  throw Error(Errc::invalid_argument, "no intra-core prime&probe channel on the LLC");
}

}  // namespace

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::raw: return "raw";
    case Scenario::full_flush: return "full_flush";
    case Scenario::protected_: return "protected";
  }
  return "?";
}

std::optional<Scenario> parse_scenario(std::string_view name) {
  for (Scenario s : {Scenario::raw, Scenario::full_flush, Scenario::protected_}) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

std::string_view to_string(ChannelKind k) {
  switch (k) {
    case ChannelKind::prime_probe: return "prime_probe";
    case ChannelKind::kernel_image: return "kernel";
    case ChannelKind::flush_latency: return "flush_latency";
    case ChannelKind::interrupt: return "interrupt";
    case ChannelKind::llc_side: return "llc_side";
  }
  return "?";
}

std::optional<ChannelKind> parse_channel_kind(std::string_view name) {
  for (ChannelKind k : {ChannelKind::prime_probe, ChannelKind::kernel_image, ChannelKind::flush_latency,
                        ChannelKind::interrupt, ChannelKind::llc_side}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

bool channel_supports(ChannelKind kind, Scenario scenario) {
  switch (kind) {
    case ChannelKind::prime_probe:
    case ChannelKind::kernel_image:
      return true;
    case ChannelKind::flush_latency:
    case ChannelKind::interrupt:
    case ChannelKind::llc_side:
      return scenario != Scenario::full_flush;
  }
  return false;
}

Cycles cycles_per_ms(const PlatformProfile& p) { return static_cast<Cycles>(std::llround(p.clock_ghz * 1e6)); }

double default_noise_sigma(const PlatformProfile& p) {
  return 0.02 * static_cast<double>(p.latency.of(p.l1d.level_name).hit);
}

SwitchConfig scenario_switch_config(const System& sys, Scenario scenario, bool pad,
                                    const ScenarioTuning& tuning) {
  SwitchConfig cfg;
  switch (scenario) {
    case Scenario::raw:
      break;
    case Scenario::full_flush:
      cfg.flush_targets = {Resource::l1d, Resource::l1i, Resource::tlb, Resource::btb, Resource::bhb, Resource::l2};
      if (sys.profile().unified.size() > 1) cfg.flush_targets.push_back(Resource::llc);
      break;
    case Scenario::protected_:
      cfg.flush_targets = {Resource::l1d, Resource::l1i, Resource::tlb, Resource::btb, Resource::bhb};
      cfg.prefetch_shared = true;
      cfg.partition_irqs = true;
      if (pad) {
        const Cycles worst = sys.worst_switch_cycles(cfg);
        cfg.pad_cycles = tuning.pad_cycles.value_or(System::protected_pad(worst, tuning.irq_margin));
        cfg.irq_margin_cycles =
            tuning.pad_cycles ? static_cast<Cycles>(std::llround(tuning.irq_margin * static_cast<double>(cfg.pad_cycles)))
                              : cfg.pad_cycles - worst;
      }
      break;
  }
  return cfg;
}

std::pair<ColourSet, ColourSet> domain_colours(const PlatformProfile& p, double share,
                                               const ScenarioTuning& tuning) {
  const auto colours = static_cast<std::uint32_t>(colour_count(p.partitioned(), p.page_bytes));
  const std::vector<ColourSet> split = split_colours(colours, {share, 1.0 - share});
  return {tuning.receiver_colours.value_or(split[0]), tuning.sender_colours.value_or(split[1])};
}

System make_scenario_system(const PlatformProfile& p, Scenario scenario, const TwoDomainOptions& opt,
                            const std::function<void(System&)>& prepare) {
  std::vector<DomainSpec> specs{{"receiver", {}, opt.timeslice, 0}, {"sender", {}, opt.timeslice, opt.sender_core}};
  if (scenario == Scenario::protected_ || opt.coloured_userland) {
    std::tie(specs[0].colours, specs[1].colours) = domain_colours(p, opt.share, opt.tuning);
  }
  System sys(p, std::move(specs));
  if (scenario != Scenario::raw) {
    sys.clone_kernel(sys.initial_image(), kReceiver);
    sys.clone_kernel(sys.initial_image(), kSender);
  }
  if (prepare) prepare(sys);
  sys.set_switch_config(scenario_switch_config(sys, scenario, opt.pad, opt.tuning));
  return sys;
}

std::vector<std::string> channel_alphabet(const PlatformProfile& p, const ChannelSpec& spec) {
  switch (spec.kind) {
    case ChannelKind::kernel_image:
      return {"Signal", "SetPriority", "Poll", "Idle"};
    case ChannelKind::interrupt:
      return {"no", "yes"};
    case ChannelKind::prime_probe:
      if (spec.resource == Resource::bhb) return {"not-taken", "taken"};
      break;
    default:
      break;
  }
  std::vector<std::string> labels;
  for (std::uint64_t v : alphabet_values(p, spec)) labels.push_back(std::to_string(v));
  return labels;
}

SampleSet run_prime_probe(const PlatformProfile& p, const ChannelSpec& spec) {
  require_support(spec);
  TwoDomainOptions opt;
  opt.timeslice = spec.timeslice.value_or(cycles_per_ms(p));
  opt.share = spec.share;
  opt.tuning = spec.tuning;
  System sys = make_scenario_system(p, spec.scenario, opt);
  const std::vector<std::uint64_t> values = alphabet_values(p, spec);
  SampleSet out = empty_set(p, spec);
  const std::vector<std::uint32_t> schedule = draw_schedule(spec, values.size());
  Noise noise(spec.seed, spec.noise_sigma.value_or(default_noise_sigma(p)));
  PrimeProbe pp = make_prime_probe(sys, spec.resource);

  pp.probe();
  for (std::size_t it = 0; it <= schedule.size(); ++it) {
    const std::uint32_t sym = it == 0 ? 0 : schedule[it - 1];
    sys.preempt(0);
    pp.send(values[sym]);
    sys.preempt(0);
    const double clean = pp.probe();
    if (it > 0) out.add(sym, clean, noise(clean));
  }
  return out;
}

SampleSet run_kernel_channel(const PlatformProfile& p, const ChannelSpec& spec) {
  require_support(spec);
  TwoDomainOptions opt;
  opt.timeslice = spec.timeslice.value_or(cycles_per_ms(p));
  opt.share = spec.share;
  opt.tuning = spec.tuning;
  opt.coloured_userland = true;
  System sys = make_scenario_system(p, spec.scenario, opt);
  SampleSet out = empty_set(p, spec);
  const std::vector<std::uint32_t> schedule = draw_schedule(spec, 4);
  Noise noise(spec.seed, spec.noise_sigma.value_or(default_noise_sigma(p)));

  const CacheGeometry& g = p.partitioned();
  std::size_t partitioned_level = 0;
  while (p.unified[partitioned_level].level_name != g.level_name) ++partitioned_level;
  const std::uint64_t colours = colour_count(g, p.page_bytes);
  const std::uint64_t recv_pages = g.size_bytes / p.page_bytes * sys.domain(kReceiver).colours.size() / colours;

  auto probe = [&] {
    double misses = 0;
    for (std::uint64_t a = 0; a < recv_pages * p.page_bytes; a += g.line_bytes) {
      if (sys.user_access(0, kRecvData + a, AccessKind::read).served_level > partitioned_level + 1) misses += 1;
    }
    return misses;
  };
  constexpr Syscall kCalls[] = {Syscall::signal, Syscall::set_priority, Syscall::poll, Syscall::idle};

  probe();
  for (std::size_t it = 0; it <= schedule.size(); ++it) {
    const std::uint32_t sym = it == 0 ? 3 : schedule[it - 1];
    sys.preempt(0);
    for (unsigned r = 0; r < spec.syscall_repeats; ++r) sys.syscall(0, kCalls[sym]);
    sys.preempt(0);
    const double clean = probe();
    if (it > 0) out.add(sym, clean, noise(clean));
  }
  return out;
}

FlushLatencyResult run_flush_latency_channel(const PlatformProfile& p, const ChannelSpec& spec) {
  require_support(spec);
  TwoDomainOptions opt;
  opt.timeslice = spec.timeslice.value_or(cycles_per_ms(p));
  opt.share = spec.share;
  opt.tuning = spec.tuning;
  opt.pad = spec.scenario == Scenario::protected_;
  System sys = make_scenario_system(p, Scenario::protected_, opt);
  const std::vector<std::uint64_t> values = alphabet_values(p, spec);
  FlushLatencyResult out{empty_set(p, spec), empty_set(p, spec)};
  out.offline.channel += "/offline";
  out.online.channel += "/online";
  const std::vector<std::uint32_t> schedule = draw_schedule(spec, values.size());
  Noise noise(spec.seed, spec.noise_sigma.value_or(default_noise_sigma(p)));
  const std::uint64_t line = p.l1d.line_bytes;

  for (std::size_t it = 0; it <= schedule.size(); ++it) {
    const std::uint32_t sym = it == 0 ? 0 : schedule[it - 1];
    sys.run_until(0, sys.deadline(0));
    const Cycles last_seen = sys.now(0);
    sys.preempt(0);
    for (std::uint64_t i = 0; i < values[sym]; ++i) sys.load(0, kSendData + i * line, AccessKind::write);
    sys.run_until(0, sys.deadline(0));
    sys.preempt(0);
    const Cycles resumed = sys.now(0);
    if (it == 0) continue;
    const double offline = static_cast<double>(resumed - last_seen);
    const double online = static_cast<double>(sys.deadline(0) - resumed);
    out.offline.add(sym, offline, noise(offline));
    out.online.add(sym, online, noise(online));
  }
  return out;
}

SampleSet run_interrupt_channel(const PlatformProfile& p, const ChannelSpec& spec) {
  require_support(spec);
  TwoDomainOptions opt;
  opt.timeslice = spec.timeslice.value_or(10 * cycles_per_ms(p));
  opt.share = spec.share;
  opt.tuning = spec.tuning;
  IrqId irq;
  System sys = make_scenario_system(p, spec.scenario, opt, [&](System& s) {
    irq = s.create_irq(0);
    s.set_irq_owner(irq, s.domain(kSender).kernel);
  });
  SampleSet out = empty_set(p, spec);
  const std::vector<std::uint32_t> schedule = draw_schedule(spec, 2);
  Noise noise(spec.seed, spec.noise_sigma.value_or(default_noise_sigma(p)));
  Rng phase(mix_seed(spec.seed, kPhase));
  const Cycles period = cycles_per_ms(p);

  for (std::size_t it = 0; it <= schedule.size(); ++it) {
    const std::uint32_t sym = it == 0 ? 0 : schedule[it - 1];
    sys.run_until(0, sys.deadline(0));
    sys.preempt(0);
    if (sys.irq(irq).awaiting_ack) sys.ack_irq(irq);
    if (sym == 1) {
      sys.arm_irq(irq, sys.now(0) + phase.below(period), period);
    } else {
      sys.disarm_irq(irq);
    }
    while (auto ev = sys.run_until(0, sys.deadline(0)).irq) sys.ack_irq(*ev);
    sys.preempt(0);
    // The receiver polls the cycle counter; each preemption ends one online interval.
    Cycles start = sys.now(0);
    while (true) {
      const RunEvent ev = sys.run_until(0, sys.deadline(0));
      const double online = static_cast<double>(ev.time - start);
      if (it > 0) out.add(sym, online, noise(online));
      if (!ev.irq) break;
      start = sys.now(0);
    }
  }
  return out;
}

std::vector<int> decode_intervals(const std::vector<std::size_t>& active_quanta, std::size_t key_bits) {
  std::vector<int> bits;
  for (std::size_t i = 1; i < active_quanta.size() && bits.size() < key_bits; ++i) {
    bits.push_back(active_quanta[i] - active_quanta[i - 1] > 1 ? 1 : 0);
  }
  bits.resize(key_bits, 0);
  return bits;
}

SideChannelResult run_llc_side_channel(const PlatformProfile& p, const ChannelSpec& spec) {
  require_support(spec);
  if (p.cores < 2) throw Error(Errc::invalid_argument, "the LLC side channel needs two cores");
  const DomainId victim = kReceiver;
  const DomainId spy = kSender;
  std::vector<DomainSpec> specs{{"victim", {}, cycles_per_ms(p), 0}, {"spy", {}, cycles_per_ms(p), 1}};
  const CacheGeometry& llc = p.last_level();
  if (spec.scenario == Scenario::protected_) {
    std::tie(specs[0].colours, specs[1].colours) = domain_colours(p, spec.share, spec.tuning);
  }
  System sys(p, std::move(specs));
  if (spec.scenario == Scenario::protected_) {
    sys.clone_kernel(sys.initial_image(), victim);
    sys.clone_kernel(sys.initial_image(), spy);
  }

  SideChannelResult res;
  if (spec.key) {
    res.key = *spec.key;
  } else {
    res.key.assign(spec.key_bits, 0);
    std::fill(res.key.begin(), res.key.begin() + static_cast<std::ptrdiff_t>(spec.key_bits / 2), 1);
    Rng rng(mix_seed(spec.seed, kKey));
    rng.shuffle(res.key.begin(), res.key.end());
  }

  // Per-quantum victim activity: 1 = square, 2 = multiply.
  std::vector<int> activity;
  for (int bit : res.key) {
    activity.push_back(1);
    if (bit) activity.push_back(2);
  }
  activity.push_back(1);
  res.quanta = activity.size();

  const std::uint64_t page = p.page_bytes;
  const std::uint64_t line = llc.line_bytes;
  const std::size_t spy_colours = sys.domain(spy).colours.size();
  const std::uint64_t llc_pages = llc.size_bytes / page;
  const auto colours = colour_count(p.partitioned(), p.page_bytes);
  const std::uint64_t spy_pages = spy_colours == 0 ? llc_pages : llc_pages * spy_colours / colours;
  const Cache& llc_state = sys.machine().unified(1, p.unified.size() - 1);
  const unsigned memory = sys.machine().memory_level();

  std::vector<std::uint64_t> spy_sets;
  for (std::uint64_t a = 0; a < spy_pages * page; a += line) {
    spy_sets.push_back(llc_state.set_index(sys.physical(spy, kSendData + a)));
  }
  res.reachable_sets = std::set<std::uint64_t>(spy_sets.begin(), spy_sets.end()).size();

  const std::uint64_t square = kRecvData;
  const std::uint64_t multiply = kRecvData + 7 * page + 5 * line;
  std::map<std::uint64_t, std::vector<std::uint32_t>> misses;
  auto probe = [&](std::size_t quantum, bool record) {
    for (std::size_t i = 0; i < spy_sets.size(); ++i) {
      const MemoryAccess a = sys.user_access(1, kSendData + i * line, AccessKind::read);
      if (record && a.served_level == memory) {
        auto& row = misses[spy_sets[i]];
        if (row.empty()) row.assign(res.quanta, 0);
        ++row[quantum];
      }
    }
  };

  probe(0, false);
  for (std::size_t q = 0; q < res.quanta; ++q) {
    if (activity[q] == 1) sys.load(0, square, AccessKind::read);
    if (activity[q] == 2) sys.load(0, multiply, AccessKind::read);
    probe(q, true);
  }

  std::size_t best_active = 0;
  std::vector<std::size_t> best_quanta;
  for (const auto& [set, row] : misses) {
    std::vector<std::size_t> active;
    for (std::size_t q = 0; q < row.size(); ++q) {
      if (row[q] > 0) active.push_back(q);
    }
    if (active.size() > best_active) {
      best_active = active.size();
      best_quanta = active;
      res.hottest_set = set;
    }
  }
  res.trace = std::move(misses);
  res.recovered = decode_intervals(best_quanta, res.key.size());
  std::size_t right = 0;
  for (std::size_t i = 0; i < res.key.size(); ++i) right += res.key[i] == res.recovered[i];
  res.accuracy = res.key.empty() ? 0.0 : static_cast<double>(right) / static_cast<double>(res.key.size());
  return res;
}

}  // namespace tpsim
