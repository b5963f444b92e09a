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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tpsim/microarch.hpp"
#include "tpsim/types.hpp"

namespace tpsim {

/// Flushable / probe-able hardware resources. `llc` names the last cache level,
/// which is `l2` itself on platforms without an L3.
enum class Resource { l1d, l1i, l2, llc, tlb, btb, bhb };

std::string_view to_string(Resource r);
std::optional<Resource> parse_resource(std::string_view name);

/// Fixed cycle costs of kernel code paths.
struct KernelCosts {
  Cycles lock = 30;
  Cycles tick = 200;
  Cycles irq_mask_base = 50;
  Cycles irq_mask_per_irq = 20;
  Cycles stack_switch = 100;
  Cycles thread_switch = 150;
  Cycles unlock = 30;
  Cycles timer_reprogram = 300;
  Cycles return_to_user = 120;
  Cycles syscall_entry = 100;
  Cycles syscall_exit = 80;
  Cycles irq_delivery = 2500;
  unsigned switch_code_lines = 8;  // kernel text lines touched per switch phase
  unsigned stack_lines = 4;        // live kernel stack copied on a stack switch
};

/// Page counts of one kernel image.
struct KernelLayout {
  std::uint64_t code_pages = 36;
  std::uint64_t rodata_pages = 8;
  std::uint64_t data_pages = 8;
  std::uint64_t stack_pages = 2;

  std::uint64_t total_pages() const { return code_pages + rodata_pages + data_pages + stack_pages; }
};

struct PlatformProfile {
  std::string name;
  std::string description;
  double clock_ghz = 1.0;
  unsigned cores = 1;
  std::uint64_t page_bytes = 4096;
  std::uint64_t memory_frames = 16384;
  std::uint64_t boot_frames = 64;

  CacheGeometry l1d;
  CacheGeometry l1i;
  std::vector<CacheGeometry> unified;  // L2, L3, ... in order
  std::size_t first_shared = 1;        // index into `unified` of the first shared level
  CacheGeometry dtlb;
  CacheGeometry itlb;
  CacheGeometry stlb;
  CacheGeometry btb;
  unsigned bhb_history_bits = 12;
  bool io_ports = false;  // x86 I/O port table in the shared kernel data

  LatencyModel latency;
  std::string partitioned_cache = "L2";
  KernelCosts kernel;
  KernelLayout layout;

  void validate() const;
  const CacheGeometry& cache(std::string_view level_name) const;
  const CacheGeometry& partitioned() const { return cache(partitioned_cache); }
  const CacheGeometry& last_level() const { return unified.back(); }
  /// Geometry probed by a prime&probe channel on `r` (TLB -> DTLB).
  const CacheGeometry& geometry_of(Resource r) const;
  double cycles_to_us(double cycles) const { return cycles / (clock_ghz * 1000.0); }
};

struct MemoryAccess {
  Cycles latency = 0;
  unsigned served_level = 0;  // 0 = L1, unified.size() + 1 = memory
  Cycles translation = 0;
};

/// The cores and cache hierarchy of one platform. Unified levels below
/// `first_shared` are private per core; the rest are shared. The hierarchy is
/// inclusive: evicting a line from a level back-invalidates every copy above it.
class Machine {
 public:
  explicit Machine(const PlatformProfile& profile);

  const PlatformProfile& profile() const { return profile_; }
  unsigned cores() const { return static_cast<unsigned>(cores_.size()); }
  unsigned memory_level() const { return static_cast<unsigned>(profile_.unified.size()) + 1; }

  /// Cache access through the hierarchy, with TLB translation when
  /// `translate` is set (kernel accesses use global mappings and skip it).
  MemoryAccess access(unsigned core, DomainId domain, Address addr, AccessKind kind,
                      bool translate = true);
  Cycles translate(unsigned core, DomainId domain, std::uint64_t vaddr, bool ifetch);
  Cycles branch(unsigned core, DomainId domain, std::uint64_t addr, bool taken);

  /// Flushes a resource as seen from `core`; returns its cost.
  Cycles flush(unsigned core, Resource r);
  /// Upper bound on the cost of flushing `r` (every line dirty).
  Cycles worst_flush_cycles(Resource r) const;
  /// Upper bound on one cache access: memory latency plus a dirty write-back per level.
  Cycles worst_access_cycles() const;
  Cycles memory_latency() const;

  Cache& l1d(unsigned core) { return cores_[core].l1d; }
  Cache& l1i(unsigned core) { return cores_[core].l1i; }
  const Cache& l1d(unsigned core) const { return cores_[core].l1d; }
  const Cache& l1i(unsigned core) const { return cores_[core].l1i; }
  Cache& unified(unsigned core, std::size_t level);
  const Cache& unified(unsigned core, std::size_t level) const;
  const Cache& cache(unsigned core, std::string_view level_name) const;
  Cache& dtlb(unsigned core) { return cores_[core].dtlb; }
  const Cache& dtlb(unsigned core) const { return cores_[core].dtlb; }
  const Cache& itlb(unsigned core) const { return cores_[core].itlb; }
  const Cache& stlb(unsigned core) const { return cores_[core].stlb; }
  BranchPredictor& predictor(unsigned core) { return cores_[core].predictor; }
  const BranchPredictor& predictor(unsigned core) const { return cores_[core].predictor; }

  /// Whether every on-core resource of `core` equals the other machine's.
  bool same_core_state(unsigned core, const Machine& other) const;

 private:
  struct Core {
    Cache l1d;
    Cache l1i;
    std::vector<Cache> private_levels;
    Cache dtlb;
    Cache itlb;
    Cache stlb;
    BranchPredictor predictor;
  };

  Cache& level(unsigned core, std::size_t unified_index);
  Cycles evict_from(unsigned core, std::size_t unified_index, const Eviction& ev);
  bool back_invalidate(unsigned core, std::size_t unified_index, std::uint64_t tag);
  void mark_dirty_below(unsigned core, std::size_t unified_index, std::uint64_t tag);
  Cycles flush_unified(unsigned core, std::size_t unified_index);

  PlatformProfile profile_;
  unsigned line_shift_;
  std::vector<Core> cores_;
  std::vector<Cache> shared_;
};

}  // namespace tpsim
