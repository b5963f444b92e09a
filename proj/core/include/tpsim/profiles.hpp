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

#include <string>
#include <string_view>
#include <vector>

#include "tpsim/machine.hpp"

namespace tpsim {

/// Built-in platform profiles: "haswell" (Core i7-4700) and "sabre" (Cortex A9).
/// Geometries follow the hardware; latencies are simulator defaults.
std::vector<std::string> builtin_profile_names();
PlatformProfile builtin_profile(std::string_view name);

PlatformProfile haswell_profile();
PlatformProfile sabre_profile();

}  // namespace tpsim
