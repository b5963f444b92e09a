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

// Independent reference models used to check the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <list>
#include <map>
#include <numbers>
#include <vector>

namespace oracle {

// Exact-LRU set-associative cache over line numbers, as a list per set.
class LruCache {
 public:
  LruCache(std::uint64_t sets, std::uint64_t ways) : sets_(sets), ways_(ways), lru_(sets) {}

  // True on hit. Set = line mod sets.
  bool access(std::uint64_t line) {
    auto& set = lru_[line % sets_];
    auto it = std::find(set.begin(), set.end(), line);
    if (it != set.end()) {
      set.erase(it);
      set.push_front(line);
      return true;
    }
    set.push_front(line);
    if (set.size() > ways_) set.pop_back();
    return false;
  }

  std::size_t resident() const {
    std::size_t n = 0;
    for (const auto& s : lru_) n += s.size();
    return n;
  }

 private:
  std::uint64_t sets_;
  std::uint64_t ways_;
  std::vector<std::list<std::uint64_t>> lru_;
};

// gshare direction predictor: 2-bit counters indexed by (pc/4) xor history.
class Gshare {
 public:
  explicit Gshare(unsigned bits) : bits_(bits), table_(std::size_t{1} << bits, 1) {}

  // Returns whether the direction was predicted correctly, then trains.
  bool branch(std::uint64_t pc, bool taken) {
    const std::uint64_t mask = (std::uint64_t{1} << bits_) - 1;
    int& c = table_[((pc >> 2) ^ history_) & mask];
    const bool correct = (c >= 2) == taken;
    c = taken ? std::min(c + 1, 3) : std::max(c - 1, 0);
    history_ = ((history_ << 1) | (taken ? 1 : 0)) & mask;
    return correct;
  }

 private:
  unsigned bits_;
  std::uint64_t history_ = 0;
  std::vector<int> table_;
};

inline double normal_pdf(double x, double mu, double sd) {
  const double z = (x - mu) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2 * std::numbers::pi));
}

// I(X;Y) in bits for equiprobable X over the given means, Y | X=i ~ N(means[i], sd^2),
// by composite Simpson quadrature over +-12 sd.
inline double mixture_mi(const std::vector<double>& means, double sd, int intervals = 200000) {
  const double lo = *std::min_element(means.begin(), means.end()) - 12 * sd;
  const double hi = *std::max_element(means.begin(), means.end()) + 12 * sd;
  const double step = (hi - lo) / intervals;
  const double k = static_cast<double>(means.size());
  auto integrand = [&](double y) {
    double mix = 0;
    std::vector<double> f(means.size());
    for (std::size_t i = 0; i < means.size(); ++i) {
      f[i] = normal_pdf(y, means[i], sd);
      mix += f[i] / k;
    }
    double s = 0;
    for (double fi : f) {
      if (fi > 0 && mix > 0) s += fi / k * std::log2(fi / mix);
    }
    return s;
  };
  double total = integrand(lo) + integrand(hi);
  for (int i = 1; i < intervals; ++i) total += (i % 2 ? 4 : 2) * integrand(lo + i * step);
  return total * step / 3;
}

// Plain Gaussian KDE evaluated by direct summation.
inline double kde(const std::vector<double>& xs, double h, double y) {
  double s = 0;
  for (double x : xs) s += normal_pdf(y, x, h);
  return s / static_cast<double>(xs.size());
}

// MI in bits of per-class KDEs (equiprobable classes) by direct evaluation on a fine grid.
inline double kde_mi(const std::vector<std::vector<double>>& classes, const std::vector<double>& h,
                     std::size_t points = 8192) {
  double lo = INFINITY, hi = -INFINITY, hmax = 0;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    for (double x : classes[i]) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    hmax = std::max(hmax, h[i]);
  }
  lo -= 8 * hmax;
  hi += 8 * hmax;
  const double step = (hi - lo) / static_cast<double>(points - 1);
  const double k = static_cast<double>(classes.size());
  double total = 0;
  std::vector<double> f(classes.size());
  for (std::size_t g = 0; g < points; ++g) {
    const double y = lo + step * static_cast<double>(g);
    double mix = 0;
    for (std::size_t i = 0; i < classes.size(); ++i) {
      f[i] = kde(classes[i], h[i], y);
      mix += f[i] / k;
    }
    for (double fi : f) {
      if (fi > 0 && mix > 0) total += fi / k * std::log2(fi / mix) * step;
    }
  }
  return total;
}

// Silverman's rule with min(sd, IQR/1.34), type-7 quantiles.
inline double silverman(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double m = 0;
  for (double x : xs) m += x;
  m /= n;
  double ss = 0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / (n - 1));
  auto q = [&](double p) {
    const double pos = p * (n - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= xs.size()) return xs.back();
    return xs[i] + (pos - static_cast<double>(i)) * (xs[i + 1] - xs[i]);
  };
  const double iqr = q(0.75) - q(0.25);
  const double spread = iqr > 0 ? std::min(sd, iqr / 1.34) : sd;
  return 1.06 * spread * std::pow(n, -0.2);
}

}  // namespace oracle
