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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tpsim/colouring.hpp"
#include "tpsim/error.hpp"
#include "tpsim/machine.hpp"
#include "tpsim/types.hpp"

namespace tpsim {

enum class Syscall { signal, set_priority, poll, idle };

std::string_view to_string(Syscall s);
std::optional<Syscall> parse_syscall(std::string_view name);
/// Distinct kernel lines a syscall touches.
unsigned syscall_footprint_lines(Syscall s);

/// Kernel state that stays global after cloning, one cache line each.
enum class SharedRegion {
  scheduler_queues,
  scheduler_bitmap,
  current_decision,
  irq_state_table,
  irq_endpoint_caps,
  current_irq,
  asid_table,
  io_port_table,  // x86 only
  current_thread,
  current_cspace,
  current_kernel,
  idle_thread,
  fpu_owner,
  kernel_lock,
  ipi_barrier,
};

std::string_view to_string(SharedRegion r);

struct SharedKernelData {
  std::vector<SharedRegion> regions;
  std::vector<std::uint64_t> phys;  // line-aligned, parallel to `regions`

  bool has(SharedRegion r) const;
  std::uint64_t address(SharedRegion r) const;
};

/// Shared data of a platform; the x86 profile also carries the I/O port table.
SharedKernelData layout_shared_data(const PlatformProfile& profile, std::uint64_t base_phys);

enum class KernelRegion { code, rodata, data, stack };

struct KernelImage {
  ImageId id;
  DomainId owner;
  bool is_initial = false;
  bool alive = true;
  std::vector<Frame> frames;  // code, rodata, data, stack
  std::set<IrqId> owned_irqs;
  std::uint32_t running_cores = 0;
};

struct SwitchConfig {
  Cycles pad_cycles = 0;  // 0 disables padding
  std::optional<Cycles> irq_margin_cycles;
  std::vector<Resource> flush_targets;
  bool prefetch_shared = false;
  bool partition_irqs = false;

  /// Tick lateness a padded switch absorbs (a delayed timer interrupt); 5% of the pad unless set.
  Cycles irq_margin() const { return irq_margin_cycles.value_or(pad_cycles / 20); }
  bool flushes(Resource r) const;
};

enum class SwitchStep {
  lock = 1,
  tick,
  mask_irqs,
  stack_switch,
  thread_switch,
  unlock,
  unmask_irqs,
  flush,
  prefetch,
  pad,
  reprogram_timer,
  return_to_user,
};

std::string_view to_string(SwitchStep s);

struct SwitchTrace {
  DomainId from;
  DomainId to;
  bool kernel_switch = false;
  Cycles tick_time = 0;   // when the switch started
  Cycles tick_delay = 0;  // how late that was relative to the deadline
  std::vector<std::pair<SwitchStep, Cycles>> steps;
  std::map<Resource, Cycles> flush_costs;
  Cycles natural = 0;  // steps 1-9
  Cycles post_pad = 0;  // steps 11-12
  Cycles elapsed = 0;   // natural + pad wait + post_pad

  bool has(SwitchStep s) const;
  Cycles cost(SwitchStep s) const;
};

/// The switch finished but took longer than the configured pad.
class PadOverrun : public Error {
 public:
  explicit PadOverrun(SwitchTrace trace, Cycles pad);
  const SwitchTrace& trace() const noexcept { return trace_; }

 private:
  SwitchTrace trace_;
};

struct DomainSpec {
  std::string name;
  ColourSet colours;  // empty: allocate from the shared reserve
  Cycles timeslice = 1'000'000;
  unsigned core = 0;
};

struct Domain {
  DomainId id;
  std::string name;
  ColourSet colours;
  ImageId kernel;
  Cycles timeslice = 0;
  unsigned core = 0;
  bool suspended = false;
  std::map<std::uint64_t, Frame> pages;  // virtual page number -> frame
};

struct IrqState {
  IrqId id;
  unsigned core = 0;
  std::optional<ImageId> owner;
  bool armed = false;
  Cycles next_fire = 0;
  Cycles period = 0;  // 0: one-shot
  bool awaiting_ack = false;
  bool partition_masked = false;
  bool pending = false;
  std::uint64_t deliveries = 0;
};

struct MaskSnapshot {
  Cycles time = 0;
  unsigned core = 0;
  ImageId current_image;
  std::vector<IrqId> unmasked;
};

struct RunEvent {
  Cycles time = 0;
  std::optional<IrqId> irq;  // set when an interrupt preempted the run
};

/// The model kernel on one machine: frames, images, domains, IRQs and the
/// per-core clocks. Every domain starts on the initial kernel image.
class System {
 public:
  System(const PlatformProfile& profile, std::vector<DomainSpec> domains, SwitchConfig cfg = {});

  Machine& machine() { return machine_; }
  const Machine& machine() const { return machine_; }
  const PlatformProfile& profile() const { return machine_.profile(); }
  const SwitchConfig& switch_config() const { return cfg_; }
  void set_switch_config(SwitchConfig cfg);
  const ColourPartition& partition() const { return partition_; }
  const SharedKernelData& shared_data() const { return shared_; }

  ImageId initial_image() const { return ImageId{0}; }
  ImageId clone_kernel(ImageId source, DomainId owner);
  void destroy_kernel(ImageId image);
  const KernelImage& image(ImageId id) const;
  std::size_t image_count() const { return images_.size(); }
  std::uint64_t image_pages() const { return profile().layout.total_pages(); }

  const Domain& domain(DomainId id) const;
  std::size_t domain_count() const { return domains_.size(); }
  DomainId current(unsigned core) const { return cores_.at(core).current; }
  ImageId current_image(unsigned core) const { return cores_.at(core).image; }
  Cycles now(unsigned core) const { return cores_.at(core).now; }
  Cycles deadline(unsigned core) const { return cores_.at(core).deadline; }

  /// User-mode work of the domain current on `core`; each advances the clock.
  Cycles load(unsigned core, std::uint64_t vaddr, AccessKind kind);
  MemoryAccess user_access(unsigned core, std::uint64_t vaddr, AccessKind kind);
  Cycles branch(unsigned core, std::uint64_t addr, bool taken);
  Cycles syscall(unsigned core, Syscall which);
  void spin(unsigned core, Cycles cycles) { cores_.at(core).now += cycles; }
  /// Spins until `until`, returning early when a device interrupt is delivered.
  RunEvent run_until(unsigned core, Cycles until);

  /// Timer-tick-driven switch to `next` at max(now, deadline). Throws
  /// PadOverrun after completing the switch when padding was too short.
  SwitchTrace domain_switch(unsigned core, DomainId next);
  /// Switch to the next domain of `core` in round-robin order.
  SwitchTrace preempt(unsigned core);

  IrqId create_irq(unsigned core = 0);
  void set_irq_owner(IrqId irq, ImageId image);
  void arm_irq(IrqId irq, Cycles first_fire, Cycles period);
  void disarm_irq(IrqId irq);
  void ack_irq(IrqId irq);
  const IrqState& irq(IrqId id) const;
  bool irq_unmasked(IrqId id) const;
  const std::vector<MaskSnapshot>& mask_log() const { return mask_log_; }
  void clear_mask_log() { mask_log_.clear(); }

  /// Physical address backing a user virtual address, mapping a frame on first use.
  std::uint64_t physical(DomainId domain, std::uint64_t vaddr);
  std::vector<Frame> user_frames(DomainId domain) const;

  /// Upper bound on steps 1-9 of a kernel switch under `cfg`.
  Cycles worst_switch_cycles(const SwitchConfig& cfg) const;
  Cycles post_pad_cycles() const;
  /// Pad such that the worst case fits with `margin_fraction` of the pad to spare.
  static Cycles protected_pad(Cycles worst, double margin_fraction = 0.05);

  static constexpr std::uint64_t kKernelVirtBase = 0xffff'ff80'0000'0000ull;

 private:
  struct CoreState {
    DomainId current;
    ImageId image;
    Cycles now = 0;
    Cycles deadline = 0;
  };

  Domain& mutable_domain(DomainId id);
  KernelImage& mutable_image(ImageId id);
  Cycles kernel_touch(unsigned core, ImageId image, KernelRegion region, std::uint64_t line,
                      AccessKind kind);
  Cycles shared_touch(unsigned core, SharedRegion r, AccessKind kind);
  Cycles mask_cost(const KernelImage& image) const;
  void apply_irq_partition(unsigned core);
  void snapshot(unsigned core);
  std::uint64_t region_first_page(KernelRegion r) const;
  std::uint64_t region_pages(KernelRegion r) const;

  Machine machine_;
  SwitchConfig cfg_;
  ColourPartition partition_;
  SharedKernelData shared_;
  std::vector<KernelImage> images_;
  std::vector<Domain> domains_;
  std::vector<CoreState> cores_;
  std::vector<IrqState> irqs_;
  std::vector<MaskSnapshot> mask_log_;
};

}  // namespace tpsim
