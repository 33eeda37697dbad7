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

#include "fewlat/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fewlat/csv.hpp"
#include "fewlat/errors.hpp"

namespace fewlat {

Normalization normalization_from_name(std::string_view name) {
  if (name == "zscore") return Normalization::kZscore;
  if (name == "minmax") return Normalization::kMinmax;
  if (name == "none") return Normalization::kNone;
  throw ValidationError("unknown normalization '" + std::string(name) + "'");
}

std::string_view normalization_name(Normalization n) {
  switch (n) {
    case Normalization::kZscore: return "zscore";
    case Normalization::kMinmax: return "minmax";
    case Normalization::kNone: return "none";
  }
  return "?";
}

WeightMode weight_mode_from_name(std::string_view name) {
  if (name == "uniform") return WeightMode::kUniform;
  if (name == "hardware") return WeightMode::kHardware;
  if (name == "adaptation_emphasis") return WeightMode::kAdaptationEmphasis;
  throw ValidationError("unknown weight mode '" + std::string(name) + "'");
}

std::string_view weight_mode_name(WeightMode m) {
  switch (m) {
    case WeightMode::kUniform: return "uniform";
    case WeightMode::kHardware: return "hardware";
    case WeightMode::kAdaptationEmphasis: return "adaptation_emphasis";
  }
  return "?";
}

void validate(const WeightConfig& cfg) {
  if (!(cfg.epsilon_floor > 0.0)) {
    throw ValidationError("epsilon_floor must be > 0");
  }
  if (!(cfg.target_sample_multiplier > 0.0)) {
    throw ValidationError("target_sample_multiplier must be > 0");
  }
  if (!(cfg.emphasis_factor > 0.0)) {
    throw ValidationError("emphasis_factor must be > 0");
  }
}

std::vector<SpecVector> normalize_specs(std::span<const DeviceSpec> specs,
                                        Normalization mode) {
  std::vector<SpecVector> out;
  out.reserve(specs.size());
  for (const auto& s : specs) {
    out.push_back({static_cast<double>(s.core_count), s.max_clock_ghz,
                   s.tdp_watts});
  }
  if (mode == Normalization::kNone || out.empty()) return out;

  const double n = static_cast<double>(out.size());
  for (std::size_t k = 0; k < 3; ++k) {
    if (mode == Normalization::kZscore) {
      double mean = 0.0;
      for (const auto& v : out) mean += v[k];
      mean /= n;
      double var = 0.0;
      for (const auto& v : out) var += (v[k] - mean) * (v[k] - mean);
      double sd = std::sqrt(var / n);
      for (auto& v : out) v[k] = sd > 0.0 ? (v[k] - mean) / sd : 0.0;
    } else {
      double lo = out[0][k], hi = out[0][k];
      for (const auto& v : out) {
        lo = std::min(lo, v[k]);
        hi = std::max(hi, v[k]);
      }
      for (auto& v : out) v[k] = hi > lo ? (v[k] - lo) / (hi - lo) : 0.0;
    }
  }
  return out;
}

double device_distance(const SpecVector& target, const SpecVector& train) {
  double sq = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    double d = target[k] - train[k];
    sq += d * d;
  }
  return std::sqrt(sq);
}

double importance_weight(double distance, const WeightConfig& cfg) {
  if (!(distance >= 0.0)) {
    throw DomainError("importance_weight: distance must be >= 0");
  }
  return 1.0 / std::sqrt(std::max(distance, cfg.epsilon_floor));
}

std::vector<DeviceWeight> device_weights(std::span<const DeviceSpec> specs,
                                         const std::string& target,
                                         std::span<const std::string> train_devices,
                                         const WeightConfig& cfg) {
  std::vector<DeviceSpec> involved{find_spec(specs, target)};
  for (const auto& d : train_devices) involved.push_back(find_spec(specs, d));
  std::vector<SpecVector> norm = normalize_specs(involved, cfg.normalization);
  std::vector<DeviceWeight> out;
  for (std::size_t i = 0; i < train_devices.size(); ++i) {
    double d = device_distance(norm[0], norm[i + 1]);
    out.push_back({target, train_devices[i], d, importance_weight(d, cfg)});
  }
  return out;
}

std::vector<WeightedSample> assign_sample_weights(
    std::span<const TrainingSample> pool,
    std::span<const TrainingSample> target_samples,
    std::span<const DeviceSpec> specs, const std::string& target,
    const WeightConfig& cfg) {
  validate(cfg);
  std::map<std::string, double> per_device;
  if (cfg.mode == WeightMode::kHardware) {
    std::vector<std::string> devices;
    for (const auto& s : pool) {
      if (!per_device.contains(s.device)) {
        per_device[s.device] = 0.0;
        devices.push_back(s.device);
      }
    }
    for (const auto& w : device_weights(specs, target, devices, cfg)) {
      per_device[w.train_device] = w.weight;
    }
  }

  std::vector<WeightedSample> out;
  out.reserve(pool.size() + target_samples.size());
  double max_pool = 0.0;
  for (const auto& s : pool) {
    double w = cfg.mode == WeightMode::kHardware ? per_device.at(s.device) : 1.0;
    max_pool = std::max(max_pool, w);
    out.push_back({s, w});
  }
  if (pool.empty()) max_pool = 1.0;

  const double target_weight = cfg.target_sample_multiplier * max_pool;
  for (const auto& s : target_samples) {
    double w = target_weight;
    if (cfg.mode == WeightMode::kAdaptationEmphasis &&
        s.origin == SampleOrigin::kMeasured) {
      w *= cfg.emphasis_factor;
    }
    out.push_back({s, w});
  }
  return out;
}

std::string weights_report_csv(std::span<const DeviceWeight> rows) {
  csv::Writer w({"target_device", "train_device", "distance", "weight"});
  for (const auto& r : rows) {
    w.field(r.target_device).field(r.train_device).field(r.distance).field(r.weight);
    w.end_row();
  }
  return w.str();
}

}  // namespace fewlat
