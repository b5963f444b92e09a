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

#include "tpsim/colouring.hpp"

#include <cmath>

#include "tpsim/error.hpp"

namespace tpsim {

namespace {
const ColourSet kNoColours;
}

std::uint32_t colour_of_frame(std::uint64_t phys_addr, const CacheGeometry& geometry,
                              std::uint64_t page_bytes) {
  if (geometry.indexing != Indexing::physical) {
    throw Error(Errc::virtually_indexed, geometry.level_name + " is virtually indexed and cannot be coloured");
  }
  if (!is_pow2(page_bytes) || phys_addr % page_bytes != 0) {
    throw Error(Errc::invalid_argument, "frame address must be page aligned");
  }
  return static_cast<std::uint32_t>((phys_addr / page_bytes) % colour_count(geometry, page_bytes));
}

std::vector<Frame> make_frames(std::uint64_t first_frame, std::uint64_t count,
                               const CacheGeometry& geometry, std::uint64_t page_bytes) {
  std::vector<Frame> frames;
  frames.reserve(count);
  for (std::uint64_t f = first_frame; f < first_frame + count; ++f) {
    const std::uint64_t addr = f * page_bytes;
    frames.push_back(Frame{addr, colour_of_frame(addr, geometry, page_bytes)});
  }
  return frames;
}

const ColourSet& ColourPartition::colours_of(DomainId domain) const {
  auto it = colours_.find(domain);
  return it == colours_.end() ? kNoColours : it->second;
}

const std::set<Frame>& ColourPartition::pool_of(DomainId domain) const {
  auto it = pools_.find(domain);
  return it == pools_.end() ? reserve_ : it->second;
}

std::set<Frame>& ColourPartition::mutable_pool(DomainId domain) {
  auto it = pools_.find(domain);
  return it == pools_.end() ? reserve_ : it->second;
}

std::size_t ColourPartition::total_frames() const {
  std::size_t n = reserve_.size();
  for (const auto& [d, pool] : pools_) n += pool.size();
  return n;
}

ColourPartition partition_pool(const std::vector<Frame>& frames,
                               const std::map<DomainId, ColourSet>& assignment) {
  ColourPartition p;
  std::map<std::uint32_t, DomainId> owner;
  for (const auto& [domain, colours] : assignment) {
    for (std::uint32_t c : colours) {
      auto [it, fresh] = owner.emplace(c, domain);
      if (!fresh) {
        throw Error(Errc::overlapping_colours, "colour " + std::to_string(c) + " claimed by domains " +
                                                   it->second.str() + " and " + domain.str());
      }
    }
    p.colours_[domain] = colours;
    if (!colours.empty()) p.pools_[domain];
  }
  for (const Frame& f : frames) {
    auto it = owner.find(f.colour);
    if (it == owner.end()) {
      p.reserve_.insert(f);
    } else {
      p.pools_[it->second].insert(f);
    }
  }
  return p;
}

Frame allocate_frame(ColourPartition& partition, DomainId domain) {
  std::set<Frame>& pool = partition.mutable_pool(domain);
  if (pool.empty()) {
    throw Error(Errc::pool_exhausted, "no free frames for domain " + domain.str());
  }
  Frame f = *pool.begin();
  pool.erase(pool.begin());
  return f;
}

void release_frame(ColourPartition& partition, DomainId domain, const Frame& frame) {
  const ColourSet& colours = partition.colours_of(domain);
  if (!colours.empty() && !colours.contains(frame.colour)) {
    throw Error(Errc::invalid_argument, "frame colour " + std::to_string(frame.colour) +
                                            " does not belong to domain " + domain.str());
  }
  if (!partition.mutable_pool(domain).insert(frame).second) {
    throw Error(Errc::invalid_argument, "frame released twice");
  }
}

std::vector<ColourSet> split_colours(std::uint32_t colour_count, const std::vector<double>& shares) {
  double total = 0;
  for (double s : shares) {
    if (!(s > 0 && s <= 1)) throw Error(Errc::invalid_argument, "colour share must be in (0, 1]");
    total += s;
  }
  if (total > 1 + 1e-9) throw Error(Errc::invalid_argument, "colour shares exceed the whole cache");
  std::vector<ColourSet> out;
  std::uint32_t next = 0;
  for (double s : shares) {
    const auto n = static_cast<std::uint32_t>(std::floor(s * colour_count + 1e-9));
    if (n == 0) throw Error(Errc::invalid_argument, "colour share too small for any colour");
    out.push_back(colour_range(next, n));
    next += n;
  }
  return out;
}

ColourSet colour_range(std::uint32_t first, std::uint32_t count) {
  ColourSet s;
  for (std::uint32_t c = first; c < first + count; ++c) s.insert(c);
  return s;
}

}  // namespace tpsim
