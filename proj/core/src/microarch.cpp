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

#include "tpsim/microarch.hpp"

#include <algorithm>

#include "tpsim/error.hpp"

namespace tpsim {

CacheGeometry CacheGeometry::make(std::string name, std::uint64_t size_bytes, std::uint64_t ways,
                                  std::uint64_t line_bytes, Indexing indexing) {
  CacheGeometry g;
  g.level_name = std::move(name);
  g.size_bytes = size_bytes;
  g.ways = ways;
  g.line_bytes = line_bytes;
  g.indexing = indexing;
  g.validate();
  return g;
}

void CacheGeometry::validate() const {
  auto fail = [&](const std::string& why) {
    throw Error(Errc::invalid_geometry, level_name + ": " + why);
  };
  if (ways == 0) fail("ways must be >= 1");
  if (!is_pow2(ways)) fail("ways must be a power of two");
  if (!is_pow2(line_bytes)) fail("line size must be a power of two");
  if (size_bytes == 0 || size_bytes % (ways * line_bytes) != 0)
    fail("size must be a multiple of ways * line size");
  if (!is_pow2(sets())) fail("set count must be a power of two");
}

std::uint64_t colour_count(const CacheGeometry& geometry, std::uint64_t page_bytes) {
  if (!is_pow2(page_bytes)) throw Error(Errc::invalid_argument, "page size must be a power of two");
  return std::max<std::uint64_t>(1, geometry.size_bytes / (geometry.ways * page_bytes));
}

void Latency::validate(std::string_view resource) const {
  if (miss <= hit) {
    throw Error(Errc::invalid_argument,
                std::string(resource) + ": miss latency must exceed hit latency");
  }
}

const Latency& LatencyModel::of(std::string_view resource) const {
  if (auto it = overrides.find(resource); it != overrides.end()) return it->second;
  return defaults;
}

Cache::Cache(CacheGeometry geometry, Latency latency, std::uint64_t page_bytes)
    : geometry_(std::move(geometry)), latency_(latency) {
  geometry_.validate();
  latency_.validate(geometry_.level_name);
  line_shift_ = log2_exact(geometry_.line_bytes);
  set_mask_ = geometry_.sets() - 1;
  alias_mask_ = 0;
  if (geometry_.indexing == Indexing::virt && page_bytes > geometry_.line_bytes) {
    const std::uint64_t in_page = page_bytes / geometry_.line_bytes - 1;
    alias_mask_ = set_mask_ & ~in_page;
  } else if (geometry_.indexing == Indexing::virt) {
    alias_mask_ = set_mask_;
  }
  lines_.resize(geometry_.sets() * geometry_.ways);
}

std::uint64_t Cache::set_index(std::uint64_t index_addr) const {
  return (index_addr >> line_shift_) & set_mask_;
}

std::span<const CacheLine> Cache::set_lines(std::uint64_t set) const {
  return {lines_.data() + set * geometry_.ways, geometry_.ways};
}

std::optional<std::uint32_t> Cache::find(std::uint64_t set, std::uint64_t tag) const {
  const CacheLine* base = lines_.data() + set * geometry_.ways;
  for (std::uint32_t w = 0; w < geometry_.ways; ++w) {
    if (base[w].valid && base[w].tag == tag) return w;
  }
  return std::nullopt;
}

void Cache::touch(std::uint64_t set, std::uint32_t way, bool make_dirty) {
  CacheLine* base = lines_.data() + set * geometry_.ways;
  const std::uint32_t rank = base[way].lru_rank;
  for (std::uint32_t w = 0; w < geometry_.ways; ++w) {
    if (base[w].valid && base[w].lru_rank < rank) ++base[w].lru_rank;
  }
  base[way].lru_rank = 0;
  if (make_dirty) base[way].dirty = true;
}

std::uint32_t Cache::victim_way(std::uint64_t set) const {
  const CacheLine* base = lines_.data() + set * geometry_.ways;
  std::uint32_t lru = 0;
  for (std::uint32_t w = 0; w < geometry_.ways; ++w) {
    if (!base[w].valid) return w;
    if (base[w].lru_rank > base[lru].lru_rank) lru = w;
  }
  return lru;
}

std::optional<Eviction> Cache::install(std::uint64_t set, std::uint64_t tag, DomainId owner,
                                       bool dirty) {
  CacheLine* base = lines_.data() + set * geometry_.ways;
  const std::uint32_t way = victim_way(set);
  std::optional<Eviction> evicted;
  if (base[way].valid) {
    evicted = Eviction{base[way].tag, base[way].dirty, base[way].owner};
    base[way].valid = false;
    const std::uint32_t rank = base[way].lru_rank;
    for (std::uint32_t w = 0; w < geometry_.ways; ++w) {
      if (base[w].valid && base[w].lru_rank > rank) --base[w].lru_rank;
    }
  }
  for (std::uint32_t w = 0; w < geometry_.ways; ++w) {
    if (base[w].valid) ++base[w].lru_rank;
  }
  base[way] = CacheLine{tag, true, dirty, owner, 0};
  return evicted;
}

std::optional<std::pair<std::uint64_t, std::uint32_t>> Cache::locate(
    std::uint64_t tag, std::uint64_t phys_set) const {
  if (alias_mask_ == 0) {
    if (auto w = find(phys_set, tag)) return std::pair{phys_set, *w};
    return std::nullopt;
  }
  // VIPT: the bits of the set index above the page offset are unknown.
  const std::uint64_t fixed = phys_set & ~alias_mask_;
  for (std::uint64_t sub = alias_mask_;; sub = (sub - 1) & alias_mask_) {
    if (auto w = find(fixed | sub, tag)) return std::pair{fixed | sub, *w};
    if (sub == 0) break;
  }
  return std::nullopt;
}

std::optional<bool> Cache::invalidate(std::uint64_t tag, std::uint64_t phys_set_hint) {
  auto where = locate(tag, phys_set_hint);
  if (!where) return std::nullopt;
  CacheLine* base = lines_.data() + where->first * geometry_.ways;
  CacheLine& line = base[where->second];
  const bool was_dirty = line.dirty;
  const std::uint32_t rank = line.lru_rank;
  line = CacheLine{};
  for (std::uint32_t w = 0; w < geometry_.ways; ++w) {
    if (base[w].valid && base[w].lru_rank > rank) --base[w].lru_rank;
  }
  return was_dirty;
}

bool Cache::mark_dirty(std::uint64_t set, std::uint64_t tag) {
  if (auto w = find(set, tag)) {
    lines_[set * geometry_.ways + *w].dirty = true;
    return true;
  }
  return false;
}

AccessResult Cache::access(DomainId domain, Address addr, AccessKind kind) {
  const std::uint64_t set = set_index(index_address(addr));
  const std::uint64_t tag = tag_of(addr.phys);
  const bool write = kind == AccessKind::write;
  AccessResult result;
  if (auto way = find(set, tag)) {
    touch(set, *way, write);
    result.hit = true;
    result.latency = latency_.hit;
    return result;
  }
  result.latency = latency_.miss;
  result.evicted = install(set, tag, domain, write);
  if (result.evicted && result.evicted->dirty) result.latency += latency_.writeback_per_line;
  return result;
}

Cycles Cache::flush(std::vector<std::uint64_t>* written_back) {
  Cycles cost = latency_.flush_base;
  for (CacheLine& line : lines_) {
    if (line.valid && line.dirty) {
      cost += latency_.writeback_per_line;
      if (written_back) written_back->push_back(line.tag);
    }
    line = CacheLine{};
  }
  return cost;
}

std::size_t Cache::resident_lines() const {
  return static_cast<std::size_t>(
      std::count_if(lines_.begin(), lines_.end(), [](const CacheLine& l) { return l.valid; }));
}

std::size_t Cache::dirty_lines() const {
  return static_cast<std::size_t>(std::count_if(
      lines_.begin(), lines_.end(), [](const CacheLine& l) { return l.valid && l.dirty; }));
}

BranchPredictor::BranchPredictor(CacheGeometry btb_geometry, unsigned history_bits,
                                 Latency btb_latency, Latency bhb_latency)
    : btb_(std::move(btb_geometry), btb_latency),
      history_bits_(history_bits),
      history_mask_(history_bits >= 64 ? ~0ull : ((1ull << history_bits) - 1)),
      counters_(std::size_t{1} << history_bits, kColdCounter),
      bhb_latency_(bhb_latency) {
  if (history_bits == 0 || history_bits > 24) {
    throw Error(Errc::invalid_geometry, "BHB history length must be in [1, 24]");
  }
  bhb_latency_.validate("BHB");
}

std::size_t BranchPredictor::pattern_index(std::uint64_t branch_addr) const {
  return static_cast<std::size_t>(((branch_addr >> 2) ^ history_) & history_mask_);
}

Cycles BranchPredictor::touch(DomainId domain, std::uint64_t branch_addr, bool taken) {
  std::uint8_t& counter = counters_[pattern_index(branch_addr)];
  const bool predicted_taken = counter >= 2;
  if (taken && counter < 3) ++counter;
  if (!taken && counter > 0) --counter;
  history_ = ((history_ << 1) | (taken ? 1u : 0u)) & history_mask_;

  bool target_known = true;
  if (taken) {
    // Branches are identified by address in both index and tag.
    const AccessResult r = btb_.access(domain, Address{branch_addr, branch_addr}, AccessKind::read);
    target_known = r.hit;
  }
  if (predicted_taken != taken) return bhb_latency_.miss;
  if (!target_known) return btb_.latency().miss;
  return bhb_latency_.hit;
}

Cycles BranchPredictor::flush_btb() { return btb_.flush(); }

Cycles BranchPredictor::flush_bhb() {
  history_ = 0;
  std::fill(counters_.begin(), counters_.end(), kColdCounter);
  return bhb_latency_.flush_base;
}

bool BranchPredictor::same_state(const BranchPredictor& other) const {
  return btb_.same_state(other.btb_) && history_ == other.history_ && counters_ == other.counters_;
}

}  // namespace tpsim
