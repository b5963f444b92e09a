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

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "tpsim/error.hpp"
#include "tpsim/leakage.hpp"
#include "tpsim/random.hpp"

namespace tpsim {
namespace {

SampleSet gaussian_set(const std::vector<double>& means, double sd, std::size_t per_class,
                       std::uint64_t seed) {
  SampleSet s;
  s.channel = "synthetic";
  for (std::size_t i = 0; i < means.size(); ++i) s.alphabet.push_back("s" + std::to_string(i));
  Rng rng(seed);
  for (std::size_t n = 0; n < per_class; ++n) {
    for (std::uint32_t i = 0; i < means.size(); ++i) {
      const double y = means[i] + sd * rng.normal();
      s.add(i, y, y);
    }
  }
  return s;
}

std::vector<std::vector<double>> classes_of(const SampleSet& s) {
  std::vector<std::vector<double>> c;
  for (std::uint32_t i = 0; i < s.alphabet.size(); ++i) c.push_back(s.outputs_of(i));
  return c;
}

TEST(Leakage, BandwidthMatchesSilvermanOracle) {
  Rng rng(2);
  std::vector<double> xs;
  for (int i = 0; i < 777; ++i) xs.push_back(3 + 2 * rng.normal() + (i % 5 == 0 ? 20 : 0));
  EXPECT_NEAR(silverman_bandwidth(xs), oracle::silverman(xs), 1e-12);
  EXPECT_EQ(silverman_bandwidth(std::vector<double>(10, 4.0), 1e-3), 1e-3);
  // Zero IQR with nonzero spread falls back to the sd.
  std::vector<double> spike(100, 1.0);
  spike[0] = 0;
  spike[1] = 2;
  EXPECT_GT(silverman_bandwidth(spike), 0.0);
  EXPECT_THROW(silverman_bandwidth(std::vector<double>{1.0}), Error);
}

TEST(Leakage, DensityMatchesDirectSummation) {
  Rng rng(3);
  std::vector<double> xs;
  for (int i = 0; i < 300; ++i) xs.push_back(rng.normal());
  const DensityEstimate d = estimate_density(xs);
  for (double y : {-2.0, -0.3, 0.0, 1.7}) EXPECT_NEAR(d.evaluate(y), oracle::kde(xs, d.h, y), 1e-12);
}

TEST(Leakage, EstimateMatchesBruteForceKde) {
  int cases = 0;
  for (const auto& means : std::vector<std::vector<double>>{{0, 1}, {0, 2, 3}, {0, 0.5, 1, 4}}) {
    const SampleSet s = gaussian_set(means, 1.0, 400, 10 + cases++);
    const MiEstimate m = estimate_mi(s);
    EXPECT_NEAR(m.value_bits, oracle::kde_mi(classes_of(s), m.bandwidths), 2e-3);
  }
}

TEST(Leakage, EstimateMatchesMixtureOracle) {
  for (double d : {0.5, 1.0, 2.0, 4.0}) {
    const SampleSet s = gaussian_set({0, d}, 1.0, 5000, static_cast<std::uint64_t>(d * 10));
    EXPECT_NEAR(estimate_mi(s).value_bits, oracle::mixture_mi({0, d}, 1.0), 0.02) << "d=" << d;
  }
}

TEST(Leakage, Endpoints) {
  SampleSet constant;
  constant.alphabet = {"a", "b", "c"};
  for (int i = 0; i < 300; ++i) constant.add(static_cast<std::uint32_t>(i % 3), 42.0, 42.0);
  const MiEstimate zero = estimate_mi(constant);
  EXPECT_EQ(zero.value_bits, 0.0);
  EXPECT_FALSE(leak_verdict(constant).leak);

  SampleSet binary;
  binary.alphabet = {"0", "1"};
  Rng rng(9);
  for (int i = 0; i < 2000; ++i) {
    const std::uint32_t x = static_cast<std::uint32_t>(i % 2);
    const double y = 1000.0 * x + rng.uniform();
    binary.add(x, y, y);
  }
  EXPECT_NEAR(estimate_mi(binary).value_bits, 1.0, 0.01);
  EXPECT_TRUE(leak_verdict(binary).leak);
}

TEST(Leakage, PermutationInvariance) {
  const SampleSet s = gaussian_set({0, 1, 3}, 1.0, 500, 4);
  SampleSet r = s;
  std::vector<std::size_t> idx(s.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(77);
  rng.shuffle(idx.begin(), idx.end());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    r.inputs[i] = s.inputs[idx[i]];
    r.outputs[i] = s.outputs[idx[i]];
  }
  EXPECT_NEAR(estimate_mi(r).value_bits, estimate_mi(s).value_bits, 1e-12);
}

TEST(Leakage, NonNegativeAndClampFlagged) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const SampleSet s = gaussian_set({0, 0}, 1.0, 40, seed);
    const MiEstimate m = estimate_mi(s);
    EXPECT_GE(m.value_bits, 0.0);
    EXPECT_EQ(m.clamped, m.unclamped_bits < 0);
    if (m.clamped) {
      EXPECT_EQ(m.value_bits, 0.0);
    } else {
      EXPECT_EQ(m.value_bits, m.unclamped_bits);
    }
  }
}

TEST(Leakage, BoundedByInputEntropy) {
  const SampleSet s = gaussian_set({0, 100, 200, 300}, 1.0, 200, 1);
  const MiEstimate m = estimate_mi(s);
  EXPECT_LE(m.value_bits, 2.0 + 1e-9);
  EXPECT_NEAR(m.value_bits, 2.0, 0.01);
}

TEST(Leakage, EmpiricalPriorObeysDataProcessing) {
  // Merging output classes (a deterministic function of the output) cannot raise MI.
  SampleSet s = gaussian_set({0, 1, 2}, 0.7, 600, 21);
  StatsConfig cfg;
  cfg.empirical_prior = true;
  SampleSet coarse = s;
  for (double& y : coarse.outputs) y = std::round(y);
  for (std::size_t i = 0; i < coarse.size(); ++i) coarse.clean[i] = coarse.outputs[i];
  // Unequal class sizes exercise the prior weights.
  SampleSet skewed;
  skewed.alphabet = s.alphabet;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.inputs[i] != 2 || i % 3 == 0) skewed.add(s.inputs[i], s.outputs[i], s.outputs[i]);
  }
  const double fine = estimate_mi(skewed, cfg).value_bits;
  SampleSet skewed_coarse = skewed;
  for (double& y : skewed_coarse.outputs) y = std::round(y);
  EXPECT_LE(estimate_mi(skewed_coarse, cfg).value_bits, fine + 0.02);
  EXPECT_LE(estimate_mi(coarse, cfg).value_bits, estimate_mi(s, cfg).value_bits + 0.02);
  // With balanced classes both priors agree.
  EXPECT_NEAR(estimate_mi(s, cfg).value_bits, estimate_mi(s).value_bits, 1e-12);
}

TEST(Leakage, ShuffleBoundIsReproducibleAndSized) {
  const SampleSet s = gaussian_set({0, 0.05}, 1.0, 500, 8);
  StatsConfig cfg;
  const ZeroLeakageBound a = zero_leakage_bound(s, cfg);
  const ZeroLeakageBound b = zero_leakage_bound(s, cfg);
  EXPECT_EQ(a.shuffle_mis, b.shuffle_mis);
  EXPECT_EQ(a.shuffle_mis.size(), 100u);
  EXPECT_EQ(a.shuffle_count, 100u);
  EXPECT_DOUBLE_EQ(a.z, 1.645);
  EXPECT_NEAR(a.bound_bits, std::max(0.0, a.mean + 1.645 * a.sd), 1e-15);
  EXPECT_GE(a.bound_bits, 0.0);
  cfg.seed = 2;
  EXPECT_NE(zero_leakage_bound(s, cfg).shuffle_mis, a.shuffle_mis);
}

TEST(Leakage, VerdictIsStrict) {
  SampleSet constant;
  constant.alphabet = {"a", "b"};
  for (int i = 0; i < 100; ++i) constant.add(static_cast<std::uint32_t>(i % 2), 1.0, 1.0);
  const LeakVerdict v = leak_verdict(constant);
  EXPECT_EQ(v.m.value_bits, v.m0.bound_bits);
  EXPECT_FALSE(v.leak);
}

TEST(Leakage, VerdictOnGroundTruth) {
  StatsConfig cfg;
  cfg.shuffles = 30;
  int false_alarms = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.seed = seed;
    false_alarms += leak_verdict(gaussian_set({0, 0}, 1.0, 300, 100 + seed), cfg).leak;
  }
  EXPECT_LE(false_alarms, 3);
  // About 0.1 bits of analytic MI.
  ASSERT_GT(oracle::mixture_mi({0, 0.8}, 1.0), 0.1);
  const SampleSet leaky = gaussian_set({0, 0.8}, 1.0, 5000, 5);
  EXPECT_TRUE(leak_verdict(leaky, cfg).leak);
}

TEST(Leakage, ChannelMatrixRowsAreDistributions) {
  const SampleSet s = gaussian_set({0, 2, 5}, 1.0, 200, 6);
  const ChannelMatrix cm = channel_matrix(s, 16);
  ASSERT_EQ(cm.p.size(), 3u);
  EXPECT_EQ(cm.inputs, s.alphabet);
  for (const auto& row : cm.p) {
    ASSERT_EQ(row.size(), 16u);
    double sum = 0;
    for (double v : row) {
      EXPECT_GE(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  const auto& lo = s.outputs;
  EXPECT_EQ(cm.lo, *std::min_element(lo.begin(), lo.end()));
  EXPECT_EQ(cm.hi, *std::max_element(lo.begin(), lo.end()));
}

TEST(Leakage, Errors) {
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::io_error;
  };
  SampleSet one;
  one.alphabet = {"a", "b"};
  for (int i = 0; i < 10; ++i) one.add(0, i, i);
  EXPECT_EQ(code([&] { estimate_mi(one); }), Errc::degenerate_alphabet);
  EXPECT_EQ(code([&] { channel_matrix(one, 4); }), Errc::empty_input_class);
  one.add(1, 3, 3);
  EXPECT_EQ(code([&] { estimate_mi(one); }), Errc::too_few_samples);
  one.add(1, NAN, NAN);
  EXPECT_EQ(code([&] { estimate_mi(one); }), Errc::invalid_argument);
  StatsConfig bad;
  bad.shuffles = 1;
  EXPECT_EQ(code([&] { zero_leakage_bound(gaussian_set({0, 1}, 1, 10, 1), bad); }), Errc::invalid_argument);
  EXPECT_EQ(code([&] { channel_matrix(gaussian_set({0, 1}, 1, 10, 1), 1); }), Errc::invalid_argument);
}

}  // namespace
}  // namespace tpsim
