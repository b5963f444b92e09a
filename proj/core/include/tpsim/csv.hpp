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

#include <iosfwd>
#include <string>

#include "tpsim/channels.hpp"
#include "tpsim/leakage.hpp"

namespace tpsim {

// Samples: `iteration,input,output`, input as its alphabet label, one row per sample.
void write_samples_csv(std::ostream& out, const SampleSet& data);
// Reads the samples format; the alphabet is the labels in order of first appearance.
SampleSet read_samples_csv(std::istream& in, std::string channel = {});
SampleSet read_samples_csv_file(const std::string& path);

// Channel matrix in long form: `input,bin,bin_lo,bin_hi,probability`.
void write_matrix_csv(std::ostream& out, const ChannelMatrix& m);

// Side-channel trace: `set,q0,q1,...`, misses per quantum for each recorded set.
void write_trace_csv(std::ostream& out, const SideChannelResult& r);

}  // namespace tpsim
