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


#include "tpsim/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "tpsim/error.hpp"

namespace tpsim {

namespace {

std::string fmt(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace

void write_samples_csv(std::ostream& out, const SampleSet& data) {
  out << "iteration,input,output\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << i << ',' << data.alphabet.at(data.inputs[i]) << ',' << fmt(data.outputs[i]) << '\n';
  }
}

SampleSet read_samples_csv(std::istream& in, std::string channel) {
  SampleSet data;
  data.channel = std::move(channel);
  std::map<std::string, std::uint32_t, std::less<>> index;
  std::string line;
  int line_no = 0;
  auto bad = [&](const std::string& why) {
    throw Error(Errc::invalid_argument, "samples csv line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = strip_cr(line);
    if (line_no == 1) {
      if (row != "iteration,input,output") bad("expected header 'iteration,input,output'");
      continue;
    }
    if (row.empty()) continue;
    const std::size_t a = row.find(',');
    const std::size_t b = a == std::string_view::npos ? a : row.find(',', a + 1);
    if (b == std::string_view::npos || row.find(',', b + 1) != std::string_view::npos) bad("expected 3 columns");
    const std::string_view label = row.substr(a + 1, b - a - 1);
    const std::string_view value = row.substr(b + 1);
    if (label.empty()) bad("empty input label");
    double x = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
    if (ec != std::errc{} || ptr != value.data() + value.size() || value.empty()) bad("bad output value");
    auto it = index.find(label);
    if (it == index.end()) {
      it = index.emplace(std::string(label), static_cast<std::uint32_t>(data.alphabet.size())).first;
      data.alphabet.emplace_back(label);
    }
    data.inputs.push_back(it->second);
    data.outputs.push_back(x);
  }
  if (line_no == 0) throw Error(Errc::invalid_argument, "samples csv is empty");
  return data;
}

SampleSet read_samples_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  return read_samples_csv(in, path);
}

void write_matrix_csv(std::ostream& out, const ChannelMatrix& m) {
  out << "input,bin,bin_lo,bin_hi,probability\n";
  const double width = (m.hi - m.lo) / static_cast<double>(m.bins);
  for (std::size_t r = 0; r < m.p.size(); ++r) {
    for (std::size_t b = 0; b < m.bins; ++b) {
      const double lo = m.lo + width * static_cast<double>(b);
      const double hi = b + 1 == m.bins ? m.hi : lo + width;
      out << m.inputs[r] << ',' << b << ',' << fmt(lo) << ',' << fmt(hi) << ',' << fmt(m.p[r][b]) << '\n';
    }
  }
}

void write_trace_csv(std::ostream& out, const SideChannelResult& r) {
  out << "set";
  for (std::size_t q = 0; q < r.quanta; ++q) out << ",q" << q;
  out << '\n';
  for (const auto& [set, misses] : r.trace) {
    out << set;
    for (std::uint32_t m : misses) out << ',' << m;
    out << '\n';
  }
}

}  // namespace tpsim
