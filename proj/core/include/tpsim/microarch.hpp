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

// Deterministic models of the stateful, shareable hardware resources that
// timing channels exploit: set-associative caches and TLBs (exact LRU,
// write-back) and a branch predictor made of a BTB plus a gshare history.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tpsim/types.hpp"

namespace tpsim {

enum class Indexing { physical, virt };
enum class WritePolicy { writeback };
enum class AccessKind { read, write, ifetch };

struct CacheGeometry {
  std::string level_name;
  std::uint64_t size_bytes = 0;
  std::uint64_t ways = 1;
  std::uint64_t line_bytes = 64;
  Indexing indexing = Indexing::physical;
  WritePolicy write_policy = WritePolicy::writeback;

  /// Validates and returns the geometry; throws Errc::invalid_geometry.
  static CacheGeometry make(std::string name, std::uint64_t size_bytes, std::uint64_t ways,
                            std::uint64_t line_bytes, Indexing indexing);

  std::uint64_t sets() const { return size_bytes / (ways * line_bytes); }
  std::uint64_t lines() const { return size_bytes / line_bytes; }
  void validate() const;

  bool operator==(const CacheGeometry&) const = default;
};

/// Number of page colours of a cache: S / (w * P), at least one.
std::uint64_t colour_count(const CacheGeometry& geometry, std::uint64_t page_bytes);

/// Cycle costs of one resource. For a cache in a hierarchy, `hit` is the
/// load-to-use latency when this level serves the access and `miss` is the
/// latency of the next level (memory for the last one).
struct Latency {
  Cycles hit = 1;
  Cycles miss = 10;
  Cycles writeback_per_line = 0;
  Cycles flush_base = 0;

  void validate(std::string_view resource) const;
  bool operator==(const Latency&) const = default;
};

struct LatencyModel {
  Latency defaults;
  std::map<std::string, Latency, std::less<>> overrides;

  const Latency& of(std::string_view resource) const;
};

struct CacheLine {
  std::uint64_t tag = 0;  // full line (or page) number of the tagging address
  bool valid = false;
  bool dirty = false;
  DomainId owner{};
  std::uint32_t lru_rank = 0;  // 0 = most recently used

  bool operator==(const CacheLine&) const = default;
};

struct Eviction {
  std::uint64_t tag = 0;
  bool dirty = false;
  DomainId owner{};
};

struct AccessResult {
  Cycles latency = 0;
  bool hit = false;
  std::optional<Eviction> evicted;
};

/// One set-associative, write-back resource with exact LRU replacement.
///
/// Lines are tagged by the full line number of the tagging address, so a
/// virtually indexed geometry behaves like a VIPT cache: the set comes from the
/// virtual address and the tag from the physical one.
class Cache {
 public:
  Cache(CacheGeometry geometry, Latency latency, std::uint64_t page_bytes = 4096);

  const CacheGeometry& geometry() const { return geometry_; }
  const Latency& latency() const { return latency_; }

  /// Single-level access: hit promotes to MRU; miss installs over the LRU way,
  /// charging a write-back when the victim is dirty.
  AccessResult access(DomainId domain, Address addr, AccessKind kind);

  /// Writes back and invalidates everything. Returns base + dirty * writeback.
  Cycles flush(std::vector<std::uint64_t>* written_back = nullptr);

  std::uint64_t set_index(std::uint64_t index_addr) const;
  std::uint64_t tag_of(std::uint64_t tag_addr) const { return tag_addr >> line_shift_; }
  std::uint64_t index_address(const Address& a) const {
    return geometry_.indexing == Indexing::virt ? a.virt : a.phys;
  }

  // Building blocks used by the multi-level hierarchy.
  std::optional<std::uint32_t> find(std::uint64_t set, std::uint64_t tag) const;
  void touch(std::uint64_t set, std::uint32_t way, bool make_dirty);
  std::optional<Eviction> install(std::uint64_t set, std::uint64_t tag, DomainId owner,
                                  bool dirty);
  /// Invalidates `tag` wherever it may live; returns whether it was dirty.
  std::optional<bool> invalidate(std::uint64_t tag, std::uint64_t phys_set_hint);
  /// Sets the dirty bit of a resident line; false when not resident.
  bool mark_dirty(std::uint64_t set, std::uint64_t tag);
  /// Location of a resident tag given its physical set (searches VIPT aliases).
  std::optional<std::pair<std::uint64_t, std::uint32_t>> locate(std::uint64_t tag,
                                                                std::uint64_t phys_set) const;

  std::span<const CacheLine> set_lines(std::uint64_t set) const;
  std::size_t resident_lines() const;
  std::size_t dirty_lines() const;
  bool contains(std::uint64_t set, std::uint64_t tag) const { return find(set, tag).has_value(); }

  bool same_state(const Cache& other) const { return lines_ == other.lines_; }

 private:
  std::uint32_t victim_way(std::uint64_t set) const;

  CacheGeometry geometry_;
  Latency latency_;
  unsigned line_shift_;
  std::uint64_t set_mask_;
  std::uint64_t alias_mask_;  // set bits that are not fixed by the page offset
  std::vector<CacheLine> lines_;
};

/// Branch predictor: a BTB (tagged cache of branch targets) and a gshare BHB
/// (global history XOR branch index into 2-bit saturating counters).
class BranchPredictor {
 public:
  BranchPredictor(CacheGeometry btb_geometry, unsigned history_bits, Latency btb_latency,
                  Latency bhb_latency);

  /// Executes a conditional branch. Returns hit latency when the direction was
  /// predicted (and, when taken, the target was in the BTB); mispredict otherwise.
  Cycles touch(DomainId domain, std::uint64_t branch_addr, bool taken);

  Cycles flush_btb();
  Cycles flush_bhb();

  unsigned history_bits() const { return history_bits_; }
  std::uint64_t history() const { return history_; }
  std::span<const std::uint8_t> pattern_table() const { return counters_; }
  const Cache& btb() const { return btb_; }
  const Latency& bhb_latency() const { return bhb_latency_; }

  bool same_state(const BranchPredictor& other) const;

  static constexpr std::uint8_t kColdCounter = 1;  // weakly not-taken

 private:
  std::size_t pattern_index(std::uint64_t branch_addr) const;

  Cache btb_;
  unsigned history_bits_;
  std::uint64_t history_mask_;
  std::uint64_t history_ = 0;
  std::vector<std::uint8_t> counters_;
  Latency bhb_latency_;
};

}  // namespace tpsim
