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


#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tpsim/error.hpp"
#include "tpsim/microarch.hpp"
#include "tpsim/random.hpp"

namespace tpsim {
namespace {

constexpr DomainId kD{1};

Cache small_cache(std::uint64_t size = 8192, std::uint64_t ways = 4) {
  return Cache(CacheGeometry::make("T", size, ways, 64, Indexing::physical), Latency{2, 30, 5, 100});
}

AccessResult read(Cache& c, std::uint64_t addr) { return c.access(kD, Address{addr, addr}, AccessKind::read); }
AccessResult write(Cache& c, std::uint64_t addr) { return c.access(kD, Address{addr, addr}, AccessKind::write); }

TEST(CacheGeometry, RejectsInconsistentShapes) {
  EXPECT_THROW(CacheGeometry::make("x", 1000, 4, 64, Indexing::physical), Error);
  EXPECT_THROW(CacheGeometry::make("x", 8192, 3, 64, Indexing::physical), Error);
  EXPECT_THROW(CacheGeometry::make("x", 8192, 4, 48, Indexing::physical), Error);
  EXPECT_THROW(CacheGeometry::make("x", 8192, 0, 64, Indexing::physical), Error);
  try {
    CacheGeometry::make("x", 8192, 256, 64, Indexing::physical);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_geometry);
  }
}

TEST(CacheGeometry, ColourCountIsSizeOverWaysTimesPage) {
  struct Row {
    std::uint64_t size, ways;
  };
  for (Row r : {Row{32 << 10, 8}, Row{256 << 10, 8}, Row{8 << 20, 16}, Row{1 << 20, 16}, Row{16 << 10, 8}}) {
    const auto g = CacheGeometry::make("c", r.size, r.ways, 64, Indexing::physical);
    const std::uint64_t expected = std::max<std::uint64_t>(1, r.size / (r.ways * 4096));
    EXPECT_EQ(colour_count(g, 4096), expected) << r.size;
  }
  // 16 KiB / 8-way is less than a page per way: still one colour.
  EXPECT_EQ(colour_count(CacheGeometry::make("c", 16 << 10, 8, 64, Indexing::physical), 4096), 1u);
}

TEST(Cache, MissThenHit) {
  Cache c = small_cache();
  const AccessResult a = read(c, 0x1000);
  EXPECT_FALSE(a.hit);
  EXPECT_EQ(a.latency, 30u);
  const AccessResult b = read(c, 0x1008);
  EXPECT_TRUE(b.hit);
  EXPECT_EQ(b.latency, 2u);
}

TEST(Cache, MatchesLruOracleOnRandomTraces) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Cache c = small_cache(4096, 4);
    oracle::LruCache ref(c.geometry().sets(), 4);
    Rng rng(seed);
    for (int i = 0; i < 20000; ++i) {
      const std::uint64_t line = rng.below(96);
      const bool hit = read(c, line * 64).hit;
      ASSERT_EQ(hit, ref.access(line)) << "seed " << seed << " step " << i;
    }
    EXPECT_EQ(c.resident_lines(), ref.resident());
  }
}

TEST(Cache, ResidentLinesNeverExceedCapacity) {
  Cache c = small_cache(4096, 2);
  Rng rng(7);
  for (int i = 0; i < 5000; ++i) {
    read(c, rng.below(1 << 20) * 64);
    ASSERT_LE(c.resident_lines(), c.geometry().sets() * c.geometry().ways);
  }
  EXPECT_EQ(c.resident_lines(), c.geometry().lines());
}

TEST(Cache, DirtyVictimChargesWriteback) {
  Cache c = small_cache(4096, 1);  // direct mapped, 64 sets
  write(c, 0);
  const AccessResult r = read(c, 64 * 64);  // same set, different tag
  ASSERT_TRUE(r.evicted.has_value());
  EXPECT_TRUE(r.evicted->dirty);
  EXPECT_EQ(r.latency, 30u + 5u);
}

TEST(Cache, FlushIsIdempotentAndErasesHistory) {
  Cache a = small_cache();
  Cache b = small_cache();
  Rng rng(3);
  for (int i = 0; i < 3000; ++i) write(a, rng.below(4096) * 64);
  for (int i = 0; i < 50; ++i) read(b, rng.below(64) * 64);
  EXPECT_FALSE(a.same_state(b));
  a.flush();
  b.flush();
  EXPECT_TRUE(a.same_state(b));
  EXPECT_EQ(a.resident_lines(), 0u);
  const Cache snapshot = a;
  EXPECT_EQ(a.flush(), a.latency().flush_base);
  EXPECT_TRUE(a.same_state(snapshot));
}

TEST(Cache, FlushCostNonDecreasingInDirtyLines) {
  Cycles previous = 0;
  for (std::uint64_t dirty = 0; dirty <= 128; dirty += 8) {
    Cache c = small_cache();
    for (std::uint64_t i = 0; i < 128; ++i) {
      if (i < dirty) {
        write(c, i * 64);
      } else {
        read(c, i * 64);
      }
    }
    const Cycles cost = c.flush();
    EXPECT_EQ(cost, 100 + 5 * dirty);
    EXPECT_GE(cost, previous);
    previous = cost;
  }
}

TEST(Cache, AddressesDifferingAboveIndexShareASet) {
  Cache c = small_cache();
  const std::uint64_t span = c.geometry().sets() * 64;
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const std::uint64_t a = rng.below(1ULL << 40);
    EXPECT_EQ(c.set_index(a), c.set_index(a + span * (1 + rng.below(1000))));
    EXPECT_EQ(c.set_index(a), c.set_index((a & ~63ULL) | rng.below(64)));
  }
}

TEST(Cache, DeterministicReplay) {
  Cache a = small_cache();
  Cache b = small_cache();
  Rng r1(5), r2(5);
  for (int i = 0; i < 5000; ++i) {
    const std::uint64_t x = r1.below(1 << 16) * 8;
    const std::uint64_t y = r2.below(1 << 16) * 8;
    const auto kind = i % 3 == 0 ? AccessKind::write : AccessKind::read;
    ASSERT_EQ(a.access(kD, {x, x}, kind).latency, b.access(kD, {y, y}, kind).latency);
  }
  EXPECT_TRUE(a.same_state(b));
}

TEST(Cache, VirtuallyIndexedSetComesFromVirtualAddress) {
  Cache c(CacheGeometry::make("V", 32 << 10, 8, 64, Indexing::virt), Latency{4, 12, 4, 0});
  const Address a{0x3040, 0x99000 + 0x40};
  c.access(kD, a, AccessKind::read);
  EXPECT_TRUE(c.contains(c.set_index(a.virt), c.tag_of(a.phys)));
  // Same physical line through another virtual alias within the same page offset hits.
  EXPECT_TRUE(c.access(kD, Address{0x7040, a.phys}, AccessKind::read).hit);
}

TEST(BranchPredictor, DirectionMatchesGshareOracle) {
  for (unsigned bits : {4u, 8u, 12u}) {
    BranchPredictor p(CacheGeometry::make("BTB", 1 << 16, 4, 4, Indexing::virt), bits, Latency{1, 12, 0, 0},
                      Latency{1, 20, 0, 0});
    oracle::Gshare ref(bits);
    EXPECT_EQ(p.pattern_table().size(), std::size_t{1} << bits);
    Rng rng(bits);
    for (int i = 0; i < 20000; ++i) {
      const std::uint64_t pc = 0x400000 + 4 * rng.below(64);
      const bool taken = rng.below(4) != 0;
      const bool mispredicted = p.touch(kD, pc, taken) == 20;
      ASSERT_EQ(!mispredicted, ref.branch(pc, taken)) << bits << " " << i;
      ASSERT_LT(p.history(), 1ULL << bits);
    }
  }
}

TEST(BranchPredictor, FlushRestoresColdState) {
  const auto btb = CacheGeometry::make("BTB", 2048, 4, 4, Indexing::virt);
  BranchPredictor a(btb, 8, Latency{1, 12, 0, 300}, Latency{1, 20, 0, 50});
  BranchPredictor b(btb, 8, Latency{1, 12, 0, 300}, Latency{1, 20, 0, 50});
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) a.touch(kD, 4 * rng.below(4096), rng.below(2) == 1);
  EXPECT_FALSE(a.same_state(b));
  EXPECT_EQ(a.flush_bhb(), 50u);
  a.flush_btb();
  EXPECT_TRUE(a.same_state(b));
  EXPECT_THROW(BranchPredictor(btb, 0, Latency{}, Latency{}), Error);
}

TEST(BranchPredictor, TakenBranchWithUnknownTargetCostsBtbMiss) {
  BranchPredictor p(CacheGeometry::make("BTB", 2048, 4, 4, Indexing::virt), 4, Latency{1, 12, 0, 0},
                    Latency{1, 20, 0, 0});
  // Once the history is all ones the same counter is hit every time; this saturates it.
  for (int i = 0; i < 8; ++i) p.touch(kD, 0x100, true);
  EXPECT_EQ(p.touch(kD, 0x100, true), 1u);
  p.flush_btb();
  EXPECT_EQ(p.touch(kD, 0x100, true), 12u);
}

}  // namespace
}  // namespace tpsim
