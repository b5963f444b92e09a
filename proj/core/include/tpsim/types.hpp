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
#include <string>

namespace tpsim {

using Cycles = std::uint64_t;

/// Small tagged integer id. Distinct tags do not convert into each other.
template <typename Tag>
struct Id {
  std::uint32_t value = 0;

  constexpr auto operator<=>(const Id&) const = default;
  std::string str() const { return std::to_string(value); }
};

using DomainId = Id<struct DomainTag>;
using ImageId = Id<struct ImageTag>;
using IrqId = Id<struct IrqTag>;

/// Domain id used for accesses made by the kernel with no user domain current.
inline constexpr DomainId kKernelDomain{0xffffffffu};

/// Every access carries both addresses; indexing mode picks one.
struct Address {
  std::uint64_t virt = 0;
  std::uint64_t phys = 0;
};

constexpr bool is_pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

constexpr unsigned log2_exact(std::uint64_t v) {
  unsigned r = 0;
  while (v > 1) {
    v >>= 1;
    ++r;
  }
  return r;
}

}  // namespace tpsim
