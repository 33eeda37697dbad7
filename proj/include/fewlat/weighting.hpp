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

// Hardware-similarity importance weights. A training device at spec
// distance d from the target contributes samples with weight 1/sqrt(d).

#include <array>
#include <span>
#include <string>
#include <vector>

#include "fewlat/dataset.hpp"

namespace fewlat {

using SpecVector = std::array<double, 3>;  // cores, clock, TDP

enum class Normalization { kZscore, kMinmax, kNone };
enum class WeightMode { kUniform, kHardware, kAdaptationEmphasis };

Normalization normalization_from_name(std::string_view name);
std::string_view normalization_name(Normalization n);
WeightMode weight_mode_from_name(std::string_view name);
std::string_view weight_mode_name(WeightMode m);

struct WeightConfig {
  double epsilon_floor = 1e-6;
  Normalization normalization = Normalization::kZscore;
  double target_sample_multiplier = 1.0;
  WeightMode mode = WeightMode::kHardware;
  // Extra factor on measured target samples in kAdaptationEmphasis mode.
  double emphasis_factor = 10.0;
};

void validate(const WeightConfig& cfg);

// Per-dimension normalization over all devices given. Zero-spread
// dimensions map to 0 under zscore and minmax.
std::vector<SpecVector> normalize_specs(std::span<const DeviceSpec> specs,
                                        Normalization mode);

double device_distance(const SpecVector& target, const SpecVector& train);

// 1 / sqrt(max(d, epsilon_floor)).
double importance_weight(double distance, const WeightConfig& cfg);

enum class SampleOrigin { kPool, kMeasured, kVirtual };

struct TrainingSample {
  std::string device;
  int arch_index = 0;
  double latency_ms = 0.0;
  SampleOrigin origin = SampleOrigin::kPool;
};

struct WeightedSample {
  TrainingSample sample;
  double weight = 1.0;
};

struct DeviceWeight {
  std::string target_device;
  std::string train_device;
  double distance = 0.0;
  double weight = 1.0;
};

// Distances and weights of each training device relative to `target`,
// normalizing over {target} plus `train_devices`.
std::vector<DeviceWeight> device_weights(std::span<const DeviceSpec> specs,
                                         const std::string& target,
                                         std::span<const std::string> train_devices,
                                         const WeightConfig& cfg);

// Pool samples are weighted per cfg.mode; target samples (measured and
// virtual) get target_sample_multiplier * max(pool weight), and measured
// ones are further scaled by emphasis_factor in kAdaptationEmphasis mode.
// Output keeps pool samples first, then target samples, in input order.
std::vector<WeightedSample> assign_sample_weights(
    std::span<const TrainingSample> pool,
    std::span<const TrainingSample> target_samples,
    std::span<const DeviceSpec> specs, const std::string& target,
    const WeightConfig& cfg);

// weights_report.csv: `target_device,train_device,distance,weight`.
std::string weights_report_csv(std::span<const DeviceWeight> rows);

}  // namespace fewlat
