// Copyright 2026 The fewlat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Slow, definitional reference implementations shared by the unit tests and
// the acceptance runner. Nothing here calls into the library's numerics.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fewlat/archspace.hpp"
#include "fewlat/dataset.hpp"

namespace oracle {

inline std::optional<double> pearson(const std::vector<double>& x,
                                     const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

// Rank by counting: 1 + (# strictly smaller) + (# other ties) / 2.
inline std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    int less = 0, tie = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] < x[i]) ++less;
      if (j != i && x[j] == x[i]) ++tie;
    }
    r[i] = 1.0 + less + tie / 2.0;
  }
  return r;
}

inline std::optional<double> spearman(const std::vector<double>& x,
                                      const std::vector<double>& y) {
  return pearson(ranks(x), ranks(y));
}

// Exhaustive scan: every architecture in [0, 15625) measured on all devices
// is tested against the bound, then truncated by (worst gap, index).
inline std::vector<int> neighborhood(const fewlat::LatencyTable& t,
                                     const std::vector<std::string>& devices,
                                     int ref, double delta, int max_size) {
  std::vector<std::pair<double, int>> hits;
  for (int a = 0; a < fewlat::kNumArchs; ++a) {
    if (a == ref) continue;
    bool all = true, measured = true;
    double worst = 0.0;
    for (const auto& d : devices) {
      auto la = t.latency(d, a);
      if (!la) {
        measured = false;
        break;
      }
      double lr = *t.latency(d, ref);
      double diff = std::fabs(*la - lr);
      if (!(diff <= delta * lr)) all = false;
      worst = std::max(worst, diff / lr);
    }
    if (measured && all) hits.emplace_back(worst, a);
  }
  std::sort(hits.begin(), hits.end());
  if (hits.size() > static_cast<std::size_t>(max_size - 1)) {
    hits.resize(max_size - 1);
  }
  std::vector<int> out{ref};
  for (const auto& h : hits) out.push_back(h.second);
  std::sort(out.begin(), out.end());
  return out;
}

inline double rel_diff(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-300});
}

}  // namespace oracle
