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

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fewlat/dataset.hpp"

namespace fewlat {

// Fraction of predictions with |pred - truth| / truth <= bound (inclusive).
// Throws ValidationError on length mismatch, empty input or truth <= 0.
double error_bound_accuracy(std::span<const double> preds,
                            std::span<const double> truths,
                            double bound = 0.10);

double mean_abs_rel_error(std::span<const double> preds,
                          std::span<const double> truths);

// Product-moment correlation. nullopt when either series is constant.
// Throws ValidationError when lengths differ or are < 2.
std::optional<double> pearson(std::span<const double> x,
                              std::span<const double> y);

// 1-based ranks; tied values share the average of their positions.
std::vector<double> average_ranks(std::span<const double> x);

// Pearson correlation of average-tie ranks.
std::optional<double> spearman(std::span<const double> x,
                               std::span<const double> y);

struct SpearmanMatrix {
  std::vector<std::string> devices;
  // values[i][j]; nullopt when fewer than 2 common archs or a constant series.
  std::vector<std::vector<std::optional<double>>> values;
};

// Symmetric device x device rank correlation over architectures common to
// each pair; diagonal is 1.
SpearmanMatrix spearman_matrix(const LatencyTable& table);
std::string spearman_matrix_csv(const SpearmanMatrix& m);

}  // namespace fewlat
