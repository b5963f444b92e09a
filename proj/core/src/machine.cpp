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

#include "tpsim/machine.hpp"

#include <algorithm>

#include "tpsim/error.hpp"

namespace tpsim {

std::string_view to_string(Resource r) {
  switch (r) {
    case Resource::l1d: return "L1-D";
    case Resource::l1i: return "L1-I";
    case Resource::l2: return "L2";
    case Resource::llc: return "LLC";
    case Resource::tlb: return "TLB";
    case Resource::btb: return "BTB";
    case Resource::bhb: return "BHB";
  }
  return "?";
}

std::optional<Resource> parse_resource(std::string_view name) {
  for (Resource r : {Resource::l1d, Resource::l1i, Resource::l2, Resource::llc, Resource::tlb,
                     Resource::btb, Resource::bhb}) {
    if (name == to_string(r)) return r;
  }
  if (name == "l1d") return Resource::l1d;
  if (name == "l1i") return Resource::l1i;
  if (name == "l2") return Resource::l2;
  if (name == "llc") return Resource::llc;
  if (name == "tlb") return Resource::tlb;
  if (name == "btb") return Resource::btb;
  if (name == "bhb") return Resource::bhb;
  return std::nullopt;
}

void PlatformProfile::validate() const {
  auto fail = [&](const std::string& why) {
    throw Error(Errc::invalid_geometry, "profile " + name + ": " + why);
  };
  if (cores == 0) fail("needs at least one core");
  if (!is_pow2(page_bytes)) fail("page size must be a power of two");
  if (unified.empty()) fail("needs at least one unified cache level");
  if (first_shared > unified.size()) fail("first shared level out of range");
  for (const CacheGeometry* g : {&l1d, &l1i, &dtlb, &itlb, &stlb, &btb}) g->validate();
  for (const CacheGeometry& g : unified) {
    g.validate();
    if (g.indexing != Indexing::physical) fail(g.level_name + " must be physically indexed");
    if (g.line_bytes != l1d.line_bytes) fail("all cache levels must share one line size");
  }
  if (l1i.line_bytes != l1d.line_bytes) fail("all cache levels must share one line size");
  for (const CacheGeometry* g : {&dtlb, &itlb, &stlb}) {
    if (g->line_bytes != page_bytes) fail(g->level_name + " entries must cover one page");
  }
  const auto shared_count = std::count_if(unified.begin(), unified.end(), [&](const CacheGeometry& g) {
    return g.level_name == partitioned_cache;
  });
  if (shared_count != 1) fail("exactly one partitioned cache must be named");
  if (boot_frames == 0 || boot_frames >= memory_frames) fail("boot frames out of range");
  if (layout.total_pages() + 1 > boot_frames) fail("boot frames cannot hold the initial kernel");
  const std::uint64_t colours = colour_count(partitioned(), page_bytes);
  if (memory_frames % colours != 0) fail("frame count must be a multiple of the colour count");
}

const CacheGeometry& PlatformProfile::cache(std::string_view level_name) const {
  if (l1d.level_name == level_name) return l1d;
  if (l1i.level_name == level_name) return l1i;
  for (const CacheGeometry& g : unified) {
    if (g.level_name == level_name) return g;
  }
  throw Error(Errc::invalid_argument, "profile " + name + " has no cache " + std::string(level_name));
}

const CacheGeometry& PlatformProfile::geometry_of(Resource r) const {
  switch (r) {
    case Resource::l1d: return l1d;
    case Resource::l1i: return l1i;
    case Resource::l2: return unified.front();
    case Resource::llc: return unified.back();
    case Resource::tlb: return dtlb;
    case Resource::btb: return btb;
    case Resource::bhb: return btb;
  }
  return l1d;
}

Machine::Machine(const PlatformProfile& profile) : profile_(profile) {
  profile_.validate();
  line_shift_ = log2_exact(profile_.l1d.line_bytes);
  const LatencyModel& lat = profile_.latency;
  const std::uint64_t page = profile_.page_bytes;
  for (unsigned c = 0; c < profile_.cores; ++c) {
    std::vector<Cache> priv;
    for (std::size_t k = 0; k < profile_.first_shared; ++k) {
      const CacheGeometry& g = profile_.unified[k];
      priv.emplace_back(g, lat.of(g.level_name), page);
    }
    cores_.push_back(Core{
        Cache(profile_.l1d, lat.of(profile_.l1d.level_name), page),
        Cache(profile_.l1i, lat.of(profile_.l1i.level_name), page),
        std::move(priv),
        Cache(profile_.dtlb, lat.of(profile_.dtlb.level_name), page),
        Cache(profile_.itlb, lat.of(profile_.itlb.level_name), page),
        Cache(profile_.stlb, lat.of(profile_.stlb.level_name), page),
        BranchPredictor(profile_.btb, profile_.bhb_history_bits, lat.of(profile_.btb.level_name),
                        lat.of("BHB")),
    });
  }
  for (std::size_t k = profile_.first_shared; k < profile_.unified.size(); ++k) {
    const CacheGeometry& g = profile_.unified[k];
    shared_.emplace_back(g, lat.of(g.level_name), page);
  }
}

Cache& Machine::level(unsigned core, std::size_t k) {
  if (k < profile_.first_shared) return cores_[core].private_levels[k];
  return shared_[k - profile_.first_shared];
}

Cache& Machine::unified(unsigned core, std::size_t k) { return level(core, k); }

const Cache& Machine::unified(unsigned core, std::size_t k) const {
  if (k < profile_.first_shared) return cores_[core].private_levels[k];
  return shared_[k - profile_.first_shared];
}

const Cache& Machine::cache(unsigned core, std::string_view level_name) const {
  if (profile_.l1d.level_name == level_name) return cores_[core].l1d;
  if (profile_.l1i.level_name == level_name) return cores_[core].l1i;
  for (std::size_t k = 0; k < profile_.unified.size(); ++k) {
    if (profile_.unified[k].level_name == level_name) return unified(core, k);
  }
  throw Error(Errc::invalid_argument, "no cache " + std::string(level_name));
}

Cycles Machine::translate(unsigned core, DomainId domain, std::uint64_t vaddr, bool ifetch) {
  Core& c = cores_[core];
  const unsigned page_shift = log2_exact(profile_.page_bytes);
  // TLB entries are tagged by (address space, virtual page).
  const std::uint64_t key = (static_cast<std::uint64_t>(domain.value) << 40) | (vaddr >> page_shift);
  const Address a{vaddr, key << page_shift};
  Cache& first = ifetch ? c.itlb : c.dtlb;
  if (first.access(domain, a, AccessKind::read).hit) return first.latency().hit;
  if (c.stlb.access(domain, a, AccessKind::read).hit) return c.stlb.latency().hit;
  return c.stlb.latency().miss;
}

bool Machine::back_invalidate(unsigned core, std::size_t k, std::uint64_t tag) {
  const std::uint64_t phys = tag << line_shift_;
  bool dirty = false;
  auto drop = [&](Cache& child) {
    if (auto was_dirty = child.invalidate(tag, child.set_index(phys))) dirty |= *was_dirty;
  };
  auto drop_core = [&](Core& c, std::size_t below) {
    drop(c.l1d);
    drop(c.l1i);
    for (std::size_t j = 0; j < std::min(below, c.private_levels.size()); ++j) drop(c.private_levels[j]);
  };
  if (k < profile_.first_shared) {
    drop_core(cores_[core], k);
  } else {
    for (Core& c : cores_) drop_core(c, profile_.first_shared);
    for (std::size_t j = profile_.first_shared; j < k; ++j) drop(shared_[j - profile_.first_shared]);
  }
  return dirty;
}

void Machine::mark_dirty_below(unsigned core, std::size_t k, std::uint64_t tag) {
  if (k + 1 >= profile_.unified.size()) return;  // written to memory
  Cache& next = level(core, k + 1);
  next.mark_dirty(next.set_index(tag << line_shift_), tag);
}

Cycles Machine::evict_from(unsigned core, std::size_t k, const Eviction& ev) {
  Cache& c = level(core, k);
  const bool dirty = back_invalidate(core, k, ev.tag) || ev.dirty;
  if (!dirty) return 0;
  mark_dirty_below(core, k, ev.tag);
  return c.latency().writeback_per_line;
}

MemoryAccess Machine::access(unsigned core, DomainId domain, Address addr, AccessKind kind,
                             bool translate_address) {
  MemoryAccess out;
  if (translate_address) out.translation = translate(core, domain, addr.virt, kind == AccessKind::ifetch);

  Core& c = cores_[core];
  Cache& l1 = kind == AccessKind::ifetch ? c.l1i : c.l1d;
  const bool write = kind == AccessKind::write;
  const std::uint64_t tag = addr.phys >> line_shift_;
  const std::size_t n = profile_.unified.size();

  const std::uint64_t l1_set = l1.set_index(l1.index_address(addr));
  Cycles latency = 0;
  if (auto way = l1.find(l1_set, tag)) {
    l1.touch(l1_set, *way, write);
    out.latency = l1.latency().hit + out.translation;
    out.served_level = 0;
    return out;
  }

  // First unified level holding the line; n means memory.
  std::size_t served = n;
  for (std::size_t k = 0; k < n; ++k) {
    Cache& u = level(core, k);
    const std::uint64_t set = u.set_index(addr.phys);
    if (auto way = u.find(set, tag)) {
      u.touch(set, *way, false);
      served = k;
      break;
    }
  }
  latency = served < n ? level(core, served).latency().hit : level(core, n - 1).latency().miss;

  // Fill from the deepest missing level upward so inclusion always holds.
  for (std::size_t k = served; k-- > 0;) {
    Cache& u = level(core, k);
    if (auto ev = u.install(u.set_index(addr.phys), tag, domain, false)) {
      latency += evict_from(core, k, *ev);
    }
  }
  if (auto ev = l1.install(l1_set, tag, domain, write)) {
    if (ev->dirty) {
      latency += l1.latency().writeback_per_line;
      Cache& l2 = level(core, 0);
      l2.mark_dirty(l2.set_index(ev->tag << line_shift_), ev->tag);
    }
  }
  out.latency = latency + out.translation;
  out.served_level = static_cast<unsigned>(served + 1);
  return out;
}

Cycles Machine::branch(unsigned core, DomainId domain, std::uint64_t addr, bool taken) {
  return cores_[core].predictor.touch(domain, addr, taken);
}

Cycles Machine::flush_unified(unsigned core, std::size_t k) {
  Cycles cost = 0;
  Cache& target = level(core, k);
  auto drain = [&](Cache& child) {
    std::vector<std::uint64_t> dirty;
    child.flush(&dirty);
    cost += dirty.size() * child.latency().writeback_per_line;
    for (std::uint64_t tag : dirty) target.mark_dirty(target.set_index(tag << line_shift_), tag);
  };
  auto drain_core = [&](Core& c, std::size_t below) {
    drain(c.l1d);
    drain(c.l1i);
    for (std::size_t j = 0; j < std::min(below, c.private_levels.size()); ++j) drain(c.private_levels[j]);
  };
  if (k < profile_.first_shared) {
    drain_core(cores_[core], k);
  } else {
    for (Core& c : cores_) drain_core(c, profile_.first_shared);
    for (std::size_t j = profile_.first_shared; j < k; ++j) drain(shared_[j - profile_.first_shared]);
  }
  std::vector<std::uint64_t> dirty;
  cost += target.flush(&dirty);
  if (k + 1 < profile_.unified.size()) {
    for (std::uint64_t tag : dirty) mark_dirty_below(core, k, tag);
  }
  return cost;
}

Cycles Machine::flush(unsigned core, Resource r) {
  Core& c = cores_[core];
  switch (r) {
    case Resource::l1d: {
      std::vector<std::uint64_t> dirty;
      const Cycles cost = c.l1d.flush(&dirty);
      Cache& l2 = level(core, 0);
      for (std::uint64_t tag : dirty) l2.mark_dirty(l2.set_index(tag << line_shift_), tag);
      return cost;
    }
    case Resource::l1i: return c.l1i.flush();
    case Resource::l2: return flush_unified(core, 0);
    case Resource::llc: return flush_unified(core, profile_.unified.size() - 1);
    case Resource::tlb: return c.dtlb.flush() + c.itlb.flush() + c.stlb.flush();
    case Resource::btb: return c.predictor.flush_btb();
    case Resource::bhb: return c.predictor.flush_bhb();
  }
  return 0;
}

Cycles Machine::memory_latency() const { return shared_.empty()
    ? cores_.front().private_levels.back().latency().miss
    : shared_.back().latency().miss; }

Cycles Machine::worst_access_cycles() const {
  const Core& c = cores_.front();
  Cycles w = memory_latency() + c.stlb.latency().miss;
  w += std::max(c.l1d.latency().writeback_per_line, c.l1i.latency().writeback_per_line);
  for (std::size_t k = 0; k < profile_.unified.size(); ++k) w += unified(0, k).latency().writeback_per_line;
  return w;
}

Cycles Machine::worst_flush_cycles(Resource r) const {
  const Core& c = cores_.front();
  auto full = [](const Cache& cache) {
    return cache.latency().flush_base + cache.geometry().lines() * cache.latency().writeback_per_line;
  };
  switch (r) {
    case Resource::l1d: return full(c.l1d);
    case Resource::l1i: return full(c.l1i);
    case Resource::tlb: return full(c.dtlb) + full(c.itlb) + full(c.stlb);
    case Resource::btb: return full(c.predictor.btb());
    case Resource::bhb: return c.predictor.bhb_latency().flush_base;
    case Resource::l2:
    case Resource::llc: {
      const std::size_t k = r == Resource::l2 ? 0 : profile_.unified.size() - 1;
      Cycles w = full(unified(0, k));
      const unsigned fan = k < profile_.first_shared ? 1 : cores();
      w += fan * (c.l1d.geometry().lines() * c.l1d.latency().writeback_per_line +
                  c.l1i.geometry().lines() * c.l1i.latency().writeback_per_line);
      for (std::size_t j = 0; j < std::min(k, profile_.unified.size()); ++j) {
        const Cache& child = unified(0, j);
        w += (j < profile_.first_shared ? fan : 1) * child.geometry().lines() *
             child.latency().writeback_per_line;
      }
      return w;
    }
  }
  return 0;
}

bool Machine::same_core_state(unsigned core, const Machine& other) const {
  const Core& a = cores_[core];
  const Core& b = other.cores_[core];
  if (!a.l1d.same_state(b.l1d) || !a.l1i.same_state(b.l1i)) return false;
  for (std::size_t j = 0; j < a.private_levels.size(); ++j) {
    if (!a.private_levels[j].same_state(b.private_levels[j])) return false;
  }
  return a.dtlb.same_state(b.dtlb) && a.itlb.same_state(b.itlb) && a.stlb.same_state(b.stlb) &&
         a.predictor.same_state(b.predictor);
}

}  // namespace tpsim
