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

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "tpsim/microarch.hpp"
#include "tpsim/types.hpp"

namespace tpsim {

using ColourSet = std::set<std::uint32_t>;

struct Frame {
  std::uint64_t phys_addr = 0;
  std::uint32_t colour = 0;

  auto operator<=>(const Frame&) const = default;
};

/// Colour of a page-aligned physical frame in a physically indexed cache.
std::uint32_t colour_of_frame(std::uint64_t phys_addr, const CacheGeometry& geometry,
                              std::uint64_t page_bytes);

/// Frames for the physical range [first_frame, first_frame + count).
std::vector<Frame> make_frames(std::uint64_t first_frame, std::uint64_t count,
                               const CacheGeometry& geometry, std::uint64_t page_bytes);

/// Per-domain frame pools. Frames whose colour no domain claims, and every
/// frame wanted by a domain with an empty colour set, live in the reserve.
class ColourPartition {
 public:
  ColourPartition() = default;

  const std::map<DomainId, ColourSet>& domain_colours() const { return colours_; }
  const ColourSet& colours_of(DomainId domain) const;
  bool coloured(DomainId domain) const { return !colours_of(domain).empty(); }

  /// Free frames a domain can allocate from (its pool or the reserve).
  const std::set<Frame>& pool_of(DomainId domain) const;
  const std::set<Frame>& reserve() const { return reserve_; }
  std::size_t available(DomainId domain) const { return pool_of(domain).size(); }
  std::size_t total_frames() const;

 private:
  friend ColourPartition partition_pool(const std::vector<Frame>&, const std::map<DomainId, ColourSet>&);
  friend Frame allocate_frame(ColourPartition&, DomainId);
  friend void release_frame(ColourPartition&, DomainId, const Frame&);

  std::set<Frame>& mutable_pool(DomainId domain);

  std::map<DomainId, ColourSet> colours_;
  std::map<DomainId, std::set<Frame>> pools_;
  std::set<Frame> reserve_;
};

/// Routes each frame to the domain owning its colour. Throws OverlappingColours.
ColourPartition partition_pool(const std::vector<Frame>& frames,
                               const std::map<DomainId, ColourSet>& assignment);

/// Lowest-addressed free frame of the domain's pool. Throws PoolExhausted.
Frame allocate_frame(ColourPartition& partition, DomainId domain);

/// Returns a frame to the pool it was allocated from.
void release_frame(ColourPartition& partition, DomainId domain, const Frame& frame);

/// Contiguous colour ranges, one per share: floor(share * colour_count)
/// colours each, allocated from colour 0 upward. Leftover colours stay unassigned.
std::vector<ColourSet> split_colours(std::uint32_t colour_count, const std::vector<double>& shares);

ColourSet colour_range(std::uint32_t first, std::uint32_t count);

}  // namespace tpsim
