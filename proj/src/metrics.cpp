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

#include "fewlat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fewlat/csv.hpp"
#include "fewlat/errors.hpp"

namespace fewlat {

namespace {

void require_paired(std::span<const double> a, std::span<const double> b,
                    std::size_t min_len, const char* what) {
  if (a.size() != b.size()) {
    throw ValidationError(std::string(what) + ": length mismatch (" +
                          std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  }
  if (a.size() < min_len) {
    throw ValidationError(std::string(what) + ": need at least " +
                          std::to_string(min_len) + " values");
  }
}

void require_positive_truths(std::span<const double> truths, const char* what) {
  for (double t : truths) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw ValidationError(std::string(what) +
                            ": true latencies must be positive");
    }
  }
}

// Treats a series as constant when its spread is at rounding level, so that
// sums of the same terms in a different order still count as equal.
bool is_constant(std::span<const double> x) {
  auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  double scale = std::max(std::abs(*lo), std::abs(*hi));
  return *hi - *lo <= 1e-12 * scale;
}

}  // namespace

double error_bound_accuracy(std::span<const double> preds,
                            std::span<const double> truths, double bound) {
  require_paired(preds, truths, 1, "error_bound_accuracy");
  require_positive_truths(truths, "error_bound_accuracy");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (std::abs(preds[i] - truths[i]) <= bound * truths[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double mean_abs_rel_error(std::span<const double> preds,
                          std::span<const double> truths) {
  require_paired(preds, truths, 1, "mean_abs_rel_error");
  require_positive_truths(truths, "mean_abs_rel_error");
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    sum += std::abs(preds[i] - truths[i]) / truths[i];
  }
  return sum / static_cast<double>(preds.size());
}

std::optional<double> pearson(std::span<const double> x,
                              std::span<const double> y) {
  require_paired(x, y, 2, "pearson");
  if (is_constant(x) || is_constant(y)) return std::nullopt;
  const double n = static_cast<double>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> x,
                               std::span<const double> y) {
  require_paired(x, y, 2, "spearman");
  std::vector<double> rx = average_ranks(x);
  std::vector<double> ry = average_ranks(y);
  return pearson(rx, ry);
}

SpearmanMatrix spearman_matrix(const LatencyTable& table) {
  SpearmanMatrix m;
  m.devices = table.devices();
  const std::size_t n = m.devices.size();
  m.values.assign(n, std::vector<std::optional<double>>(n));
  for (std::size_t i = 0; i < n; ++i) {
    m.values[i][i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::string pair[2] = {m.devices[i], m.devices[j]};
      std::vector<int> common = table.common_archs(pair);
      std::optional<double> rho;
      if (common.size() >= 2) {
        std::vector<double> xi, xj;
        for (int a : common) {
          xi.push_back(*table.latency(pair[0], a));
          xj.push_back(*table.latency(pair[1], a));
        }
        rho = spearman(xi, xj);
      }
      m.values[i][j] = rho;
      m.values[j][i] = rho;
    }
  }
  return m;
}

std::string spearman_matrix_csv(const SpearmanMatrix& m) {
  std::vector<std::string> header{"device"};
  header.insert(header.end(), m.devices.begin(), m.devices.end());
  csv::Writer w(header);
  for (std::size_t i = 0; i < m.devices.size(); ++i) {
    w.field(m.devices[i]);
    for (const auto& v : m.values[i]) {
      if (v) {
        w.field(*v);
      } else {
        w.field(std::string_view("nan"));
      }
    }
    w.end_row();
  }
  return w.str();
}

}  // namespace fewlat
