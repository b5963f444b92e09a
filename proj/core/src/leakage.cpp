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

#include "tpsim/leakage.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <numeric>

#include <unsupported/Eigen/FFT>

#include "tpsim/error.hpp"
#include "tpsim/random.hpp"

namespace tpsim {

void SampleSet::add(std::uint32_t input, double clean_output, double noisy_output) {
  inputs.push_back(input);
  clean.push_back(clean_output);
  outputs.push_back(noisy_output);
}

std::vector<double> SampleSet::outputs_of(std::uint32_t input, bool use_clean) const {
  const std::vector<double>& src = use_clean && !clean.empty() ? clean : outputs;
  std::vector<double> out;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i] == input) out.push_back(src[i]);
  }
  return out;
}

SampleSet SampleSet::clean_copy() const {
  SampleSet s = *this;
  if (!clean.empty()) s.outputs = clean;
  return s;
}

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(std::span<const double> v) {
  const double m = mean_of(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Linear-interpolated quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + (pos - static_cast<double>(i)) * (sorted[i + 1] - sorted[i]);
}

struct Classes {
  std::vector<std::uint32_t> labels;
  std::vector<std::vector<double>> outputs;
};

Classes group(const SampleSet& data) {
  std::map<std::uint32_t, std::vector<double>> by;
  for (std::size_t i = 0; i < data.size(); ++i) by[data.inputs[i]].push_back(data.outputs[i]);
  Classes c;
  for (auto& [label, v] : by) {
    if (v.size() < 2) throw Error(Errc::too_few_samples, "input class " + std::to_string(label) + " has fewer than 2 samples");
    for (double x : v) {
      if (!std::isfinite(x)) throw Error(Errc::invalid_argument, "non-finite output");
    }
    c.labels.push_back(label);
    c.outputs.push_back(std::move(v));
  }
  if (c.labels.size() < 2) throw Error(Errc::degenerate_alphabet, "need at least two distinct input symbols");
  return c;
}

std::vector<double> gaussian_kernel(double h, double delta, std::size_t grid) {
  const double half_width = std::ceil(6.0 * h / delta);
  const auto m = static_cast<std::size_t>(std::min<double>(half_width, static_cast<double>(grid - 1)));
  std::vector<double> k(2 * m + 1);
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double x = (static_cast<double>(i) - static_cast<double>(m)) * delta / h;
    k[i] = std::exp(-0.5 * x * x);
  }
  const double sum = std::accumulate(k.begin(), k.end(), 0.0);
  for (double& v : k) v /= sum;
  return k;
}

// Same-size convolution of `binned` with the centred kernel.
std::vector<double> convolve(const std::vector<double>& binned, const std::vector<double>& kernel) {
  const std::size_t g = binned.size();
  const std::size_t m = kernel.size() / 2;
  std::vector<double> out(g, 0.0);
  if (kernel.size() <= 65) {
    for (std::size_t i = 0; i < g; ++i) {
      if (binned[i] == 0) continue;
      const std::size_t lo = i >= m ? 0 : m - i;
      const std::size_t hi = std::min(kernel.size(), g + m - i);
      for (std::size_t j = lo; j < hi; ++j) out[i + j - m] += binned[i] * kernel[j];
    }
    return out;
  }
  std::size_t n = 1;
  while (n < g + kernel.size()) n <<= 1;
  std::vector<double> a(n, 0.0), b(n, 0.0);
  std::copy(binned.begin(), binned.end(), a.begin());
  std::copy(kernel.begin(), kernel.end(), b.begin());
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> fa, fb;
  fft.fwd(fa, a);
  fft.fwd(fb, b);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  std::vector<double> full;
  fft.inv(full, fa);
  for (std::size_t i = 0; i < g; ++i) out[i] = full[i + m];
  return out;
}

struct Grid {
  double lo = 0;
  double hi = 0;
  double delta = 0;
  std::size_t points = 0;
};

// Density of one class on the grid, normalised so that sum(f) * delta = 1.
std::vector<double> binned_density(const std::vector<double>& sorted, double h, const Grid& grid) {
  std::vector<double> binned(grid.points, 0.0);
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double mass = static_cast<double>(j - i) / n;
    const double u = (sorted[i] - grid.lo) / grid.delta - 0.5;
    if (u <= 0) {
      binned.front() += mass;
    } else if (u >= static_cast<double>(grid.points - 1)) {
      binned.back() += mass;
    } else {
      const auto k = static_cast<std::size_t>(u);
      const double t = u - static_cast<double>(k);
      binned[k] += mass * (1.0 - t);
      binned[k + 1] += mass * t;
    }
    i = j;
  }
  std::vector<double> f = convolve(binned, gaussian_kernel(h, grid.delta, grid.points));
  const double peak = *std::max_element(f.begin(), f.end());
  double sum = 0;
  for (double& v : f) {
    if (v < 1e-12 * peak) v = 0;
    sum += v;
  }
  for (double& v : f) v /= sum * grid.delta;
  return f;
}

MiEstimate mi_of(const Classes& classes, const StatsConfig& cfg) {
  if (cfg.grid_points < 2) throw Error(Errc::invalid_argument, "grid needs at least two points");
  const std::size_t k = classes.labels.size();
  MiEstimate est;
  std::vector<std::vector<double>> sorted(k);
  double lo = INFINITY, hi = -INFINITY, h_max = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sorted[i] = classes.outputs[i];
    std::sort(sorted[i].begin(), sorted[i].end());
    const double h = silverman_bandwidth(sorted[i], cfg.epsilon);
    est.bandwidths.push_back(h);
    est.counts.push_back(sorted[i].size());
    lo = std::min(lo, sorted[i].front());
    hi = std::max(hi, sorted[i].back());
    h_max = std::max(h_max, h);
  }
  Grid grid;
  grid.lo = lo - cfg.padding_bandwidths * h_max;
  grid.hi = hi + cfg.padding_bandwidths * h_max;
  grid.points = cfg.grid_points;
  grid.delta = (grid.hi - grid.lo) / static_cast<double>(grid.points);
  est.lo = grid.lo;
  est.hi = grid.hi;
  est.points = grid.points;

  std::vector<std::vector<double>> f(k);
  std::vector<double> w(k);
  for (std::size_t i = 0; i < k; ++i) {
    f[i] = binned_density(sorted[i], est.bandwidths[i], grid);
    w[i] = cfg.empirical_prior ? static_cast<double>(sorted[i].size()) : 1.0;
  }
  const double total_w = std::accumulate(w.begin(), w.end(), 0.0);
  const double log_w = std::log2(total_w);

  double m = 0;
  for (std::size_t i = 0; i < k; ++i) {
    double term = 0;
    for (std::size_t g = 0; g < grid.points; ++g) {
      const double fi = f[i][g];
      if (fi <= 0) continue;
      double ratio = 0;
      for (std::size_t j = 0; j < k; ++j) ratio += w[j] * (f[j][g] / fi);
      term += fi * (log_w - std::log2(ratio));
    }
    m += (w[i] / total_w) * term * grid.delta;
  }
  est.unclamped_bits = m;
  est.clamped = m < 0;
  est.value_bits = std::max(0.0, m);
  return est;
}

}  // namespace

double DensityEstimate::evaluate(double x) const {
  const double norm = 1.0 / (static_cast<double>(n) * h * std::sqrt(2.0 * std::numbers::pi));
  double s = 0;
  for (double p : points) {
    const double z = (x - p) / h;
    s += std::exp(-0.5 * z * z);
  }
  return s * norm;
}

double silverman_bandwidth(std::span<const double> samples, double epsilon) {
  if (samples.size() < 2) throw Error(Errc::too_few_samples, "density estimate needs at least 2 samples");
  const double sd = sd_of(samples);
  if (!(sd > 0)) return epsilon;
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
  const double spread = iqr > 0 ? std::min(sd, iqr / 1.34) : sd;
  return 1.06 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
}

DensityEstimate estimate_density(std::span<const double> samples, double epsilon) {
  DensityEstimate d;
  d.h = silverman_bandwidth(samples, epsilon);
  d.points.assign(samples.begin(), samples.end());
  d.n = samples.size();
  return d;
}

MiEstimate estimate_mi(const SampleSet& data, const StatsConfig& cfg) { return mi_of(group(data), cfg); }

ZeroLeakageBound zero_leakage_bound(const SampleSet& data, const StatsConfig& cfg) {
  const Classes base = group(data);
  if (cfg.shuffles < 2) throw Error(Errc::invalid_argument, "need at least two shuffles");
  ZeroLeakageBound b;
  b.shuffle_count = cfg.shuffles;
  b.z = cfg.z;
  b.seed = cfg.seed;
  b.shuffle_mis.resize(cfg.shuffles);
  for (std::size_t t = 0; t < cfg.shuffles; ++t) {
    std::vector<double> pooled = data.outputs;
    Rng rng(mix_seed(cfg.seed, t));
    rng.shuffle(pooled.begin(), pooled.end());
    Classes c;
    c.labels = base.labels;
    c.outputs.resize(base.labels.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto pos = static_cast<std::size_t>(
          std::lower_bound(c.labels.begin(), c.labels.end(), data.inputs[i]) - c.labels.begin());
      c.outputs[pos].push_back(pooled[i]);
    }
    b.shuffle_mis[t] = mi_of(c, cfg).value_bits;
  }
  b.mean = mean_of(b.shuffle_mis);
  b.sd = sd_of(b.shuffle_mis);
  b.bound_bits = std::max(0.0, b.mean + cfg.z * b.sd);
  return b;
}

LeakVerdict leak_verdict(const SampleSet& data, const StatsConfig& cfg) {
  LeakVerdict v;
  v.m = estimate_mi(data, cfg);
  v.m0 = zero_leakage_bound(data, cfg);
  v.leak = v.m.value_bits > v.m0.bound_bits;
  return v;
}

ChannelMatrix channel_matrix(const SampleSet& data, std::size_t bins) {
  if (bins < 2) throw Error(Errc::invalid_argument, "channel matrix needs at least 2 bins");
  if (data.size() == 0) throw Error(Errc::empty_input_class, "no samples");
  ChannelMatrix cm;
  cm.inputs = data.alphabet;
  cm.bins = bins;
  cm.lo = *std::min_element(data.outputs.begin(), data.outputs.end());
  cm.hi = *std::max_element(data.outputs.begin(), data.outputs.end());
  std::vector<std::vector<std::size_t>> counts(data.alphabet.size(), std::vector<std::size_t>(bins, 0));
  const double width = (cm.hi - cm.lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.inputs[i] >= data.alphabet.size()) throw Error(Errc::invalid_argument, "input outside the alphabet");
    std::size_t b = 0;
    if (width > 0) {
      b = std::min(bins - 1, static_cast<std::size_t>((data.outputs[i] - cm.lo) / width));
    }
    ++counts[data.inputs[i]][b];
  }
  for (std::size_t r = 0; r < counts.size(); ++r) {
    const std::size_t n = std::accumulate(counts[r].begin(), counts[r].end(), std::size_t{0});
    if (n == 0) throw Error(Errc::empty_input_class, "input '" + data.alphabet[r] + "' has no samples");
    std::vector<double> row(bins);
    for (std::size_t b = 0; b < bins; ++b) row[b] = static_cast<double>(counts[r][b]) / static_cast<double>(n);
    cm.p.push_back(std::move(row));
  }
  return cm;
}

}  // namespace tpsim
