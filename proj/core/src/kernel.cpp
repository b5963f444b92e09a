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

#include "tpsim/kernel.hpp"

#include <algorithm>
#include <cmath>

namespace tpsim {

namespace {

constexpr std::uint64_t kFootprintStride = 67;  // lines between successive syscall touches

struct Footprint {
  Syscall which;
  std::string_view name;
  unsigned lines;
  std::uint64_t start;
};

constexpr Footprint kFootprints[] = {
    {Syscall::signal, "Signal", 56, 0},
    {Syscall::set_priority, "SetPriority", 64, 13},
    {Syscall::poll, "Poll", 20, 29},
    {Syscall::idle, "Idle", 0, 0},
};

constexpr SharedRegion kAllRegions[] = {
    SharedRegion::scheduler_queues, SharedRegion::scheduler_bitmap, SharedRegion::current_decision,
    SharedRegion::irq_state_table,  SharedRegion::irq_endpoint_caps, SharedRegion::current_irq,
    SharedRegion::asid_table,       SharedRegion::io_port_table,     SharedRegion::current_thread,
    SharedRegion::current_cspace,   SharedRegion::current_kernel,    SharedRegion::idle_thread,
    SharedRegion::fpu_owner,        SharedRegion::kernel_lock,       SharedRegion::ipi_barrier,
};

// Shared lines touched by steps 1, 2, 5 and 6 of every switch.
constexpr unsigned kSwitchSharedTouches = 1 + 4 + 4 + 1;

}  // namespace

std::string_view to_string(Syscall s) {
  for (const Footprint& f : kFootprints) {
    if (f.which == s) return f.name;
  }
  return "?";
}

std::optional<Syscall> parse_syscall(std::string_view name) {
  for (const Footprint& f : kFootprints) {
    if (f.name == name) return f.which;
  }
  return std::nullopt;
}

unsigned syscall_footprint_lines(Syscall s) {
  for (const Footprint& f : kFootprints) {
    if (f.which == s) return f.lines;
  }
  return 0;
}

std::string_view to_string(SharedRegion r) {
  switch (r) {
    case SharedRegion::scheduler_queues: return "scheduler_queues";
    case SharedRegion::scheduler_bitmap: return "scheduler_bitmap";
    case SharedRegion::current_decision: return "current_decision";
    case SharedRegion::irq_state_table: return "irq_state_table";
    case SharedRegion::irq_endpoint_caps: return "irq_endpoint_caps";
    case SharedRegion::current_irq: return "current_irq";
    case SharedRegion::asid_table: return "asid_table";
    case SharedRegion::io_port_table: return "io_port_table";
    case SharedRegion::current_thread: return "current_thread";
    case SharedRegion::current_cspace: return "current_cspace";
    case SharedRegion::current_kernel: return "current_kernel";
    case SharedRegion::idle_thread: return "idle_thread";
    case SharedRegion::fpu_owner: return "fpu_owner";
    case SharedRegion::kernel_lock: return "kernel_lock";
    case SharedRegion::ipi_barrier: return "ipi_barrier";
  }
  return "?";
}

bool SharedKernelData::has(SharedRegion r) const {
  return std::find(regions.begin(), regions.end(), r) != regions.end();
}

std::uint64_t SharedKernelData::address(SharedRegion r) const {
  auto it = std::find(regions.begin(), regions.end(), r);
  if (it == regions.end()) {
    throw Error(Errc::invalid_argument, "platform has no shared region " + std::string(to_string(r)));
  }
  return phys[static_cast<std::size_t>(it - regions.begin())];
}

SharedKernelData layout_shared_data(const PlatformProfile& profile, std::uint64_t base_phys) {
  SharedKernelData d;
  for (SharedRegion r : kAllRegions) {
    if (r == SharedRegion::io_port_table && !profile.io_ports) continue;
    d.phys.push_back(base_phys + d.regions.size() * profile.l1d.line_bytes);
    d.regions.push_back(r);
  }
  return d;
}

bool SwitchConfig::flushes(Resource r) const {
  return std::find(flush_targets.begin(), flush_targets.end(), r) != flush_targets.end();
}

std::string_view to_string(SwitchStep s) {
  switch (s) {
    case SwitchStep::lock: return "lock";
    case SwitchStep::tick: return "tick";
    case SwitchStep::mask_irqs: return "mask_irqs";
    case SwitchStep::stack_switch: return "stack_switch";
    case SwitchStep::thread_switch: return "thread_switch";
    case SwitchStep::unlock: return "unlock";
    case SwitchStep::unmask_irqs: return "unmask_irqs";
    case SwitchStep::flush: return "flush";
    case SwitchStep::prefetch: return "prefetch";
    case SwitchStep::pad: return "pad";
    case SwitchStep::reprogram_timer: return "reprogram_timer";
    case SwitchStep::return_to_user: return "return_to_user";
  }
  return "?";
}

bool SwitchTrace::has(SwitchStep s) const {
  return std::any_of(steps.begin(), steps.end(), [&](const auto& p) { return p.first == s; });
}

Cycles SwitchTrace::cost(SwitchStep s) const {
  for (const auto& [step, c] : steps) {
    if (step == s) return c;
  }
  return 0;
}

PadOverrun::PadOverrun(SwitchTrace trace, Cycles pad)
    : Error(Errc::pad_overrun, "switch " + trace.from.str() + " -> " + trace.to.str() + " needed " +
                                   std::to_string(trace.natural) + " cycles, pad is " + std::to_string(pad)),
      trace_(std::move(trace)) {}

System::System(const PlatformProfile& profile, std::vector<DomainSpec> domains, SwitchConfig cfg)
    : machine_(profile), cfg_(std::move(cfg)) {
  const PlatformProfile& p = machine_.profile();
  if (domains.empty()) throw Error(Errc::invalid_argument, "a system needs at least one domain");
  const CacheGeometry& coloured = p.partitioned();

  shared_ = layout_shared_data(p, 0);

  KernelImage initial;
  initial.id = ImageId{0};
  initial.owner = kKernelDomain;
  initial.is_initial = true;
  initial.frames = make_frames(1, p.layout.total_pages(), coloured, p.page_bytes);
  images_.push_back(std::move(initial));

  std::map<DomainId, ColourSet> assignment;
  const auto colours = static_cast<std::uint32_t>(colour_count(coloured, p.page_bytes));
  for (std::size_t i = 0; i < domains.size(); ++i) {
    DomainSpec& spec = domains[i];
    if (spec.core >= p.cores) throw Error(Errc::invalid_argument, "domain " + spec.name + " on a missing core");
    if (spec.timeslice == 0) throw Error(Errc::invalid_argument, "domain " + spec.name + " has no timeslice");
    for (std::uint32_t c : spec.colours) {
      if (c >= colours) throw Error(Errc::invalid_argument, "colour " + std::to_string(c) + " out of range");
    }
    const DomainId id{static_cast<std::uint32_t>(i)};
    assignment[id] = spec.colours;
    domains_.push_back(Domain{id, spec.name, spec.colours, initial_image(), spec.timeslice, spec.core, false, {}});
  }
  partition_ = partition_pool(make_frames(p.boot_frames, p.memory_frames - p.boot_frames, coloured, p.page_bytes),
                              assignment);

  cores_.resize(p.cores, CoreState{kKernelDomain, initial_image(), 0, 0});
  for (unsigned c = 0; c < p.cores; ++c) {
    for (const Domain& d : domains_) {
      if (d.core == c) {
        cores_[c].current = d.id;
        cores_[c].deadline = d.timeslice;
        images_[0].running_cores |= 1u << c;
        break;
      }
    }
  }
}

void System::set_switch_config(SwitchConfig cfg) {
  cfg_ = std::move(cfg);
  for (unsigned c = 0; c < cores_.size(); ++c) apply_irq_partition(c);
}

const KernelImage& System::image(ImageId id) const {
  if (id.value >= images_.size()) throw Error(Errc::invalid_image, "no kernel image " + id.str());
  return images_[id.value];
}

KernelImage& System::mutable_image(ImageId id) {
  if (id.value >= images_.size() || !images_[id.value].alive) {
    throw Error(Errc::invalid_image, "no live kernel image " + id.str());
  }
  return images_[id.value];
}

const Domain& System::domain(DomainId id) const {
  if (id.value >= domains_.size()) throw Error(Errc::invalid_argument, "no domain " + id.str());
  return domains_[id.value];
}

Domain& System::mutable_domain(DomainId id) {
  if (id.value >= domains_.size()) throw Error(Errc::invalid_argument, "no domain " + id.str());
  return domains_[id.value];
}

ImageId System::clone_kernel(ImageId source, DomainId owner) {
  if (source.value >= images_.size() || !images_[source.value].alive) {
    throw Error(Errc::invalid_source, "cannot clone kernel image " + source.str());
  }
  Domain& d = mutable_domain(owner);
  const std::uint64_t pages = image_pages();
  if (partition_.available(owner) < pages) {
    throw Error(Errc::pool_exhausted, "domain " + d.name + " has " + std::to_string(partition_.available(owner)) +
                                          " free frames, a kernel image needs " + std::to_string(pages));
  }
  KernelImage img;
  img.id = ImageId{static_cast<std::uint32_t>(images_.size())};
  img.owner = owner;
  for (std::uint64_t i = 0; i < pages; ++i) img.frames.push_back(allocate_frame(partition_, owner));
  images_.push_back(std::move(img));
  d.kernel = images_.back().id;
  return d.kernel;
}

void System::destroy_kernel(ImageId id) {
  KernelImage& img = mutable_image(id);
  if (img.is_initial) throw Error(Errc::cannot_destroy_initial, "the initial kernel image cannot be destroyed");
  for (Domain& d : domains_) {
    if (d.kernel == id) {
      d.kernel = initial_image();
      d.suspended = true;
    }
  }
  for (unsigned c = 0; c < cores_.size(); ++c) {
    if (cores_[c].image == id) {
      cores_[c].image = initial_image();
      images_[0].running_cores |= 1u << c;
    }
  }
  for (IrqState& irq : irqs_) {
    if (irq.owner == id) irq.owner.reset();
  }
  img.owned_irqs.clear();
  for (const Frame& f : img.frames) release_frame(partition_, img.owner, f);
  img.frames.clear();
  img.running_cores = 0;
  img.alive = false;
  for (unsigned c = 0; c < cores_.size(); ++c) apply_irq_partition(c);
}

std::uint64_t System::physical(DomainId domain, std::uint64_t vaddr) {
  Domain& d = mutable_domain(domain);
  const std::uint64_t page = profile().page_bytes;
  auto it = d.pages.find(vaddr / page);
  if (it == d.pages.end()) it = d.pages.emplace(vaddr / page, allocate_frame(partition_, domain)).first;
  return it->second.phys_addr + vaddr % page;
}

std::vector<Frame> System::user_frames(DomainId domain) const {
  std::vector<Frame> out;
  for (const auto& [vpn, f] : this->domain(domain).pages) out.push_back(f);
  return out;
}

MemoryAccess System::user_access(unsigned core, std::uint64_t vaddr, AccessKind kind) {
  CoreState& cs = cores_.at(core);
  if (cs.current == kKernelDomain) throw Error(Errc::invalid_argument, "no domain runs on core " + std::to_string(core));
  const std::uint64_t phys = physical(cs.current, vaddr);
  const MemoryAccess a = machine_.access(core, cs.current, Address{vaddr, phys}, kind);
  cs.now += a.latency;
  return a;
}

Cycles System::load(unsigned core, std::uint64_t vaddr, AccessKind kind) {
  return user_access(core, vaddr, kind).latency;
}

Cycles System::branch(unsigned core, std::uint64_t addr, bool taken) {
  CoreState& cs = cores_.at(core);
  const Cycles lat = machine_.branch(core, cs.current, addr, taken);
  cs.now += lat;
  return lat;
}

Cycles System::kernel_touch(unsigned core, ImageId image, KernelRegion region, std::uint64_t line,
                            AccessKind kind) {
  const PlatformProfile& p = profile();
  const std::uint64_t lines_per_page = p.page_bytes / p.l1d.line_bytes;
  const std::uint64_t page = region_first_page(region) + (line / lines_per_page) % region_pages(region);
  const std::uint64_t offset = (line % lines_per_page) * p.l1d.line_bytes;
  const KernelImage& img = images_[image.value];
  const Address a{kKernelVirtBase + page * p.page_bytes + offset, img.frames[page].phys_addr + offset};
  return machine_.access(core, kKernelDomain, a, kind, false).latency;
}

Cycles System::shared_touch(unsigned core, SharedRegion r, AccessKind kind) {
  const std::uint64_t phys = shared_.address(r);
  return machine_.access(core, kKernelDomain, Address{kKernelVirtBase - profile().page_bytes + phys, phys}, kind,
                         false)
      .latency;
}

std::uint64_t System::region_first_page(KernelRegion r) const {
  const KernelLayout& l = profile().layout;
  switch (r) {
    case KernelRegion::code: return 0;
    case KernelRegion::rodata: return l.code_pages;
    case KernelRegion::data: return l.code_pages + l.rodata_pages;
    case KernelRegion::stack: return l.code_pages + l.rodata_pages + l.data_pages;
  }
  return 0;
}

std::uint64_t System::region_pages(KernelRegion r) const {
  const KernelLayout& l = profile().layout;
  switch (r) {
    case KernelRegion::code: return l.code_pages;
    case KernelRegion::rodata: return l.rodata_pages;
    case KernelRegion::data: return l.data_pages;
    case KernelRegion::stack: return l.stack_pages;
  }
  return 1;
}

Cycles System::syscall(unsigned core, Syscall which) {
  if (which == Syscall::idle) return 0;
  CoreState& cs = cores_.at(core);
  const KernelCosts& k = profile().kernel;
  const KernelLayout& l = profile().layout;
  const std::uint64_t lines_per_page = profile().page_bytes / profile().l1d.line_bytes;
  // Footprints skip the first code page, which holds the switch path.
  const std::uint64_t span = (l.code_pages + l.rodata_pages + l.data_pages - 1) * lines_per_page;
  const Footprint& fp = kFootprints[static_cast<std::size_t>(which)];
  Cycles c = k.syscall_entry;
  for (unsigned i = 0; i < fp.lines; ++i) {
    std::uint64_t line = lines_per_page + (fp.start + kFootprintStride * i) % span;
    KernelRegion region = KernelRegion::code;
    for (KernelRegion r : {KernelRegion::code, KernelRegion::rodata, KernelRegion::data}) {
      const std::uint64_t lines = region_pages(r) * lines_per_page;
      region = r;
      if (line < lines) break;
      line -= lines;
    }
    c += kernel_touch(core, cs.image, region, line,
                      region == KernelRegion::code ? AccessKind::ifetch : AccessKind::read);
  }
  switch (which) {
    case Syscall::signal:
      c += shared_touch(core, SharedRegion::scheduler_queues, AccessKind::read);
      c += shared_touch(core, SharedRegion::current_thread, AccessKind::read);
      break;
    case Syscall::set_priority:
      c += shared_touch(core, SharedRegion::scheduler_queues, AccessKind::write);
      c += shared_touch(core, SharedRegion::scheduler_bitmap, AccessKind::write);
      c += shared_touch(core, SharedRegion::current_decision, AccessKind::write);
      break;
    case Syscall::poll:
      c += shared_touch(core, SharedRegion::current_thread, AccessKind::read);
      break;
    case Syscall::idle:
      break;
  }
  c += k.syscall_exit;
  cs.now += c;
  return c;
}

Cycles System::mask_cost(const KernelImage& img) const {
  const KernelCosts& k = profile().kernel;
  return k.irq_mask_base + k.irq_mask_per_irq * img.owned_irqs.size();
}

SwitchTrace System::domain_switch(unsigned core, DomainId next) {
  CoreState& cs = cores_.at(core);
  Domain& to = mutable_domain(next);
  if (to.core != core) throw Error(Errc::invalid_argument, "domain " + to.name + " does not run on this core");
  const KernelCosts& k = profile().kernel;

  SwitchTrace t;
  t.from = cs.current;
  t.to = next;
  t.tick_time = std::max(cs.now, cs.deadline);
  t.tick_delay = t.tick_time - cs.deadline;
  const Cycles scheduled_tick = cs.deadline;
  cs.now = t.tick_time;
  const ImageId prev_img = cs.image;
  const ImageId next_img = to.kernel;
  t.kernel_switch = prev_img != next_img;
  // A padded switch whose tick was late by no more than the margin pads from the scheduled tick.
  const bool on_schedule = t.kernel_switch && cfg_.pad_cycles > 0 && t.tick_delay <= cfg_.irq_margin();
  const Cycles lateness = on_schedule ? t.tick_delay : 0;

  auto step = [&](SwitchStep s, Cycles c) {
    t.steps.emplace_back(s, c);
    cs.now += c;
    t.natural += c;
  };

  step(SwitchStep::lock, k.lock + shared_touch(core, SharedRegion::kernel_lock, AccessKind::write));

  Cycles c = k.tick;
  for (unsigned i = 0; i < k.switch_code_lines; ++i) {
    c += kernel_touch(core, prev_img, KernelRegion::code, i, AccessKind::ifetch);
  }
  c += shared_touch(core, SharedRegion::scheduler_queues, AccessKind::write);
  c += shared_touch(core, SharedRegion::scheduler_bitmap, AccessKind::write);
  c += shared_touch(core, SharedRegion::current_decision, AccessKind::write);
  c += shared_touch(core, SharedRegion::current_thread, AccessKind::read);
  step(SwitchStep::tick, c);

  if (t.kernel_switch) {
    if (cfg_.partition_irqs) {
      for (IrqId irq : images_[prev_img.value].owned_irqs) {
        if (irqs_[irq.value].core == core) irqs_[irq.value].partition_masked = true;
      }
      snapshot(core);
    }
    step(SwitchStep::mask_irqs, mask_cost(images_[prev_img.value]));

    c = k.stack_switch;
    for (unsigned i = 0; i < k.stack_lines; ++i) {
      c += kernel_touch(core, prev_img, KernelRegion::stack, i, AccessKind::read);
      c += kernel_touch(core, next_img, KernelRegion::stack, i, AccessKind::write);
    }
    step(SwitchStep::stack_switch, c);
  }

  c = k.thread_switch;
  c += shared_touch(core, SharedRegion::current_thread, AccessKind::write);
  c += shared_touch(core, SharedRegion::current_kernel, AccessKind::write);
  c += shared_touch(core, SharedRegion::current_cspace, AccessKind::write);
  c += shared_touch(core, SharedRegion::asid_table, AccessKind::read);
  images_[prev_img.value].running_cores &= ~(1u << core);
  images_[next_img.value].running_cores |= 1u << core;
  cs.current = next;
  cs.image = next_img;
  step(SwitchStep::thread_switch, c);
  if (t.kernel_switch && cfg_.partition_irqs) snapshot(core);

  step(SwitchStep::unlock, k.unlock + shared_touch(core, SharedRegion::kernel_lock, AccessKind::write));

  Cycles pad_wait = 0;
  if (t.kernel_switch) {
    if (cfg_.partition_irqs) {
      apply_irq_partition(core);
    }
    step(SwitchStep::unmask_irqs, mask_cost(images_[next_img.value]));

    c = 0;
    for (Resource r : cfg_.flush_targets) {
      const Cycles fc = machine_.flush(core, r);
      t.flush_costs[r] += fc;
      c += fc;
    }
    step(SwitchStep::flush, c);

    if (cfg_.prefetch_shared) {
      c = 0;
      for (SharedRegion r : shared_.regions) c += shared_touch(core, r, AccessKind::read);
      step(SwitchStep::prefetch, c);
    }

    if (cfg_.pad_cycles > 0) {
      pad_wait = cfg_.pad_cycles > lateness + t.natural ? cfg_.pad_cycles - lateness - t.natural : 0;
      t.steps.emplace_back(SwitchStep::pad, pad_wait);
    }
    t.steps.emplace_back(SwitchStep::reprogram_timer, k.timer_reprogram);
    t.post_pad += k.timer_reprogram;
  }
  t.steps.emplace_back(SwitchStep::return_to_user, k.return_to_user);
  t.post_pad += k.return_to_user;

  t.elapsed = t.natural + pad_wait + t.post_pad;
  cs.now = t.tick_time + t.elapsed;
  cs.deadline = (on_schedule ? scheduled_tick : t.tick_time) + to.timeslice;
  if (t.kernel_switch && cfg_.pad_cycles > 0 && lateness + t.natural > cfg_.pad_cycles) {
    throw PadOverrun(std::move(t), cfg_.pad_cycles);
  }
  return t;
}

SwitchTrace System::preempt(unsigned core) {
  const DomainId cur = cores_.at(core).current;
  const std::size_t n = domains_.size();
  const std::size_t start = cur == kKernelDomain ? n - 1 : cur.value;
  for (std::size_t i = 1; i <= n; ++i) {
    const Domain& d = domains_[(start + i) % n];
    if (d.core == core && !d.suspended) return domain_switch(core, d.id);
  }
  throw Error(Errc::invalid_argument, "no runnable domain on core " + std::to_string(core));
}

IrqId System::create_irq(unsigned core) {
  if (core >= cores_.size()) throw Error(Errc::invalid_argument, "irq routed to a missing core");
  IrqState s;
  s.id = IrqId{static_cast<std::uint32_t>(irqs_.size())};
  s.core = core;
  irqs_.push_back(s);
  apply_irq_partition(core);
  return s.id;
}

const IrqState& System::irq(IrqId id) const {
  if (id.value >= irqs_.size()) throw Error(Errc::invalid_argument, "no irq " + id.str());
  return irqs_[id.value];
}

void System::set_irq_owner(IrqId id, ImageId image) {
  irq(id);
  KernelImage& img = mutable_image(image);
  IrqState& s = irqs_[id.value];
  if (s.owner) images_[s.owner->value].owned_irqs.erase(id);
  s.owner = image;
  img.owned_irqs.insert(id);
  apply_irq_partition(s.core);
}

void System::arm_irq(IrqId id, Cycles first_fire, Cycles period) {
  irq(id);
  IrqState& s = irqs_[id.value];
  s.armed = true;
  s.next_fire = first_fire;
  s.period = period;
}

void System::disarm_irq(IrqId id) {
  irq(id);
  irqs_[id.value].armed = false;
}

void System::ack_irq(IrqId id) {
  irq(id);
  irqs_[id.value].awaiting_ack = false;
  snapshot(irqs_[id.value].core);
}

bool System::irq_unmasked(IrqId id) const {
  const IrqState& s = irq(id);
  return !s.awaiting_ack && !s.partition_masked;
}

void System::apply_irq_partition(unsigned core) {
  const ImageId cur = cores_[core].image;
  for (IrqState& s : irqs_) {
    if (s.core != core) continue;
    s.partition_masked = cfg_.partition_irqs && !(s.owner && *s.owner == cur);
  }
  snapshot(core);
}

void System::snapshot(unsigned core) {
  MaskSnapshot m;
  m.time = cores_[core].now;
  m.core = core;
  m.current_image = cores_[core].image;
  for (const IrqState& s : irqs_) {
    if (s.core == core && irq_unmasked(s.id)) m.unmasked.push_back(s.id);
  }
  mask_log_.push_back(std::move(m));
}

RunEvent System::run_until(unsigned core, Cycles until) {
  CoreState& cs = cores_.at(core);
  const KernelCosts& k = profile().kernel;
  auto deliver = [&](IrqState& s, Cycles at) {
    s.pending = false;
    s.awaiting_ack = true;
    ++s.deliveries;
    cs.now = at + k.irq_delivery;
    snapshot(core);
    return RunEvent{at, s.id};
  };
  while (true) {
    for (IrqState& s : irqs_) {
      if (s.core == core && s.pending && irq_unmasked(s.id) && cs.now < until) return deliver(s, cs.now);
    }
    IrqState* next = nullptr;
    for (IrqState& s : irqs_) {
      if (s.core == core && s.armed && (!next || s.next_fire < next->next_fire)) next = &s;
    }
    if (!next || std::max(next->next_fire, cs.now) >= until) {
      cs.now = std::max(cs.now, until);
      return RunEvent{cs.now, std::nullopt};
    }
    const Cycles at = std::max(next->next_fire, cs.now);
    if (next->period > 0) {
      while (next->next_fire <= at) next->next_fire += next->period;
    } else {
      next->armed = false;
    }
    if (irq_unmasked(next->id)) return deliver(*next, at);
    next->pending = true;
  }
}

Cycles System::post_pad_cycles() const {
  const KernelCosts& k = profile().kernel;
  return k.timer_reprogram + k.return_to_user;
}

Cycles System::worst_switch_cycles(const SwitchConfig& cfg) const {
  const KernelCosts& k = profile().kernel;
  const Cycles access = machine_.worst_access_cycles();
  std::uint64_t touches = kSwitchSharedTouches + k.switch_code_lines + 2ull * k.stack_lines;
  if (cfg.prefetch_shared) touches += shared_.regions.size();
  Cycles w = k.lock + k.tick + k.stack_switch + k.thread_switch + k.unlock;
  w += 2 * (k.irq_mask_base + k.irq_mask_per_irq * irqs_.size());
  w += touches * access;
  for (Resource r : cfg.flush_targets) w += machine_.worst_flush_cycles(r);
  return w;
}

Cycles System::protected_pad(Cycles worst, double margin_fraction) {
  if (!(margin_fraction >= 0 && margin_fraction < 1)) {
    throw Error(Errc::invalid_argument, "irq margin fraction must be in [0, 1)");
  }
  return static_cast<Cycles>(std::ceil(static_cast<double>(worst) / (1.0 - margin_fraction)));
}

}  // namespace tpsim
