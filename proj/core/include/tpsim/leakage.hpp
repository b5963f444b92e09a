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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tpsim {

/// (input, output) pairs of one channel run. Inputs index `alphabet`.
struct SampleSet {
  std::string channel;
  std::vector<std::string> alphabet;
  std::vector<std::uint32_t> inputs;
  std::vector<double> outputs;
  std::vector<double> clean;  // outputs before noise injection; empty when not recorded

  std::size_t size() const { return outputs.size(); }
  void add(std::uint32_t input, double clean_output, double noisy_output);
  /// Outputs (noisy, or clean when asked) of one input symbol.
  std::vector<double> outputs_of(std::uint32_t input, bool use_clean = false) const;
  /// Copy whose outputs are the clean values.
  SampleSet clean_copy() const;
};

struct StatsConfig {
  std::size_t grid_points = 4096;
  double padding_bandwidths = 3.0;
  double epsilon = 1e-6;  // bandwidth of zero-spread samples
  std::size_t shuffles = 100;
  double z = 1.645;
  bool empirical_prior = false;  // weight inputs by frequency instead of uniformly
  std::uint64_t seed = 1;
};

struct DensityEstimate {
  std::vector<double> points;
  double h = 0;
  std::size_t n = 0;

  /// Gaussian KDE at x, summed over every point.
  double evaluate(double x) const;
};

/// Silverman's rule, 1.06 * min(sd, IQR / 1.34) * n^(-1/5). Falls back to the
/// sd when the IQR is zero and to epsilon when the sd is zero.
double silverman_bandwidth(std::span<const double> samples, double epsilon = 1e-6);
DensityEstimate estimate_density(std::span<const double> samples, double epsilon = 1e-6);

struct MiEstimate {
  double value_bits = 0;
  double unclamped_bits = 0;
  bool clamped = false;
  double lo = 0;
  double hi = 0;
  std::size_t points = 0;
  std::vector<double> bandwidths;  // per input class, in class order
  std::vector<std::size_t> counts;
};

/// Mutual information between the input and output, by the rectangle method
/// over binned Gaussian KDEs of each input class's outputs.
MiEstimate estimate_mi(const SampleSet& data, const StatsConfig& cfg = {});

struct ZeroLeakageBound {
  double bound_bits = 0;
  std::size_t shuffle_count = 0;
  std::vector<double> shuffle_mis;
  double mean = 0;
  double sd = 0;
  double z = 0;
  double confidence = 0.95;
  std::uint64_t seed = 0;
};

/// Recomputes MI with the output column shuffled `cfg.shuffles` times; bound = mean + z*sd.
ZeroLeakageBound zero_leakage_bound(const SampleSet& data, const StatsConfig& cfg = {});

struct LeakVerdict {
  bool leak = false;
  MiEstimate m;
  ZeroLeakageBound m0;
};

LeakVerdict leak_verdict(const SampleSet& data, const StatsConfig& cfg = {});

struct ChannelMatrix {
  std::vector<std::string> inputs;
  double lo = 0;
  double hi = 0;
  std::size_t bins = 0;
  std::vector<std::vector<double>> p;  // p[input][bin]
};

/// Conditional output-bin distribution per input. Throws EmptyInputClass.
ChannelMatrix channel_matrix(const SampleSet& data, std::size_t bins);

}  // namespace tpsim
