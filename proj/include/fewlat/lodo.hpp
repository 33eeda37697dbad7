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

// Leave-one-device-out evaluation: each device in turn is the target,
// the rest form the training pool, and every method is trained and scored
// on the same per-fold split.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fewlat/dataset.hpp"
#include "fewlat/prior.hpp"
#include "fewlat/regressor.hpp"
#include "fewlat/weighting.hpp"

namespace fewlat {

struct MethodConfig {
  std::string name;
  bool use_virtual = false;
  WeightMode weight_mode = WeightMode::kUniform;
  bool use_regressor = true;
};

// maple_x, maple_x1, maple_baseline or lut_only.
MethodConfig method_config(std::string_view name);
std::vector<MethodConfig> parse_methods(std::string_view comma_list);
// Throws ValidationError if a named method breaks its invariants.
void validate(const MethodConfig& m);

enum class TargetLutSource {
  kProvided,  // the bundle's lut.csv entry for the target
  kNearest,   // fit on the training split of the closest device by spec
};

TargetLutSource target_lut_source_from_name(std::string_view name);
std::string_view target_lut_source_name(TargetLutSource s);

struct CorrelationGate {
  bool enabled = false;
  double threshold = 0.5;
};

struct LodoConfig {
  int n_train_archs = 900;
  int k_adapt = 3;
  std::uint64_t seed = 0;
  NeighborhoodOptions neighborhood;
  CorrelationGate gate;
  TargetLutSource target_lut = TargetLutSource::kProvided;
  WeightConfig weights;  // `mode` is taken from each method
  TrainConfig train;     // `seed` is replaced by the fold seed
  int jobs = 1;
  std::vector<std::string> targets;  // empty: every device
};

struct LodoRow {
  std::string target_device;
  std::string method;
  std::size_t n_eval = 0;
  double acc10 = 0.0;
  double mare = 0.0;
};

struct FoldSplitSummary {
  std::string target_device;
  std::size_t n_train_devices = 0;
  std::size_t n_train_samples = 0;
  std::size_t n_adapt = 0;
  std::size_t n_eval = 0;
  std::size_t adapt_eval_overlap = 0;
  std::string lut_device;  // device whose data produced the target LUT
};

struct NeighborhoodRecord {
  std::string target_device;
  Neighborhood neighborhood;
  int n_virtual = 0;
  int dropped = 0;
  std::optional<double> gate_correlation;
  bool gated_out = false;
};

struct LodoReport {
  std::uint64_t seed = 0;
  std::vector<LodoRow> rows;
  std::vector<FoldSplitSummary> splits;
  std::vector<NeighborhoodRecord> neighborhoods;
  std::vector<DeviceWeight> weights;
};

LodoReport lodo_run(const SynthBundle& data,
                    std::span<const MethodConfig> methods,
                    const LodoConfig& cfg);

// lodo_report.csv: `target_device,method,n_eval,acc10,mare,seed`.
std::string lodo_report_csv(const LodoReport& report);
// splits.csv: `target_device,n_train_devices,n_train_samples,n_adapt,
// n_eval,adapt_eval_overlap,lut_device`.
std::string splits_csv(const LodoReport& report);
// nbhd_report.csv: `target_device,reference,size,delta,measured_ms,
// n_virtual,dropped,gate_r,gated_out`.
std::string neighborhood_report_csv(const LodoReport& report);

struct DensityRow {
  std::string device;
  int reference = 0;
  int size = 0;
  std::optional<double> pearson_r;
};

// One row per (neighborhood with >= 2 members, device with a LUT).
std::vector<DensityRow> neighborhood_correlation_density(
    std::span<const Neighborhood> neighborhoods,
    std::span<const OpLatencyTable> luts, const LatencyTable& table);

// nbhd_density.csv: `device,reference,size,pearson_r`.
std::string density_csv(std::span<const DensityRow> rows);

}  // namespace fewlat
