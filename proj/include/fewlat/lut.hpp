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

// Layer-wise latency model: one scalar cost per operation kind, summed over
// the six edges of a cell.

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fewlat/archspace.hpp"

namespace fewlat {

struct LatencyRecord {
  int arch_index = 0;
  double latency_ms = 0.0;
};

struct OpLatencyTable {
  std::string device;
  std::array<double, kNumOps> cost_ms{};
};

// Throws ValidationError when a cost is negative or non-finite.
void validate(const OpLatencyTable& table);

double lut_latency(const OpLatencyTable& table, const CellArchitecture& arch);
double lut_latency(const OpLatencyTable& table, int arch_index);

struct LutFit {
  OpLatencyTable table;
  // Least-squares solution before clamping negatives to zero.
  std::array<double, kNumOps> unclamped_cost_ms{};
  std::array<bool, kNumOps> clamped{};
  double rmse_ms = 0.0;
  int n_records = 0;
};

// Ordinary least squares on the op-count design matrix, solved through the
// normal equations; negative components are clamped to 0 afterwards.
// Throws ValidationError on empty input and NumericalError (code
// RANK_DEFICIENT) when some op cost is not identifiable.
LutFit fit_lut(std::span<const LatencyRecord> records, std::string device);

// lut.csv: `device,op_id,cost_ms`, five rows per device.
std::vector<OpLatencyTable> load_lut_csv(const std::filesystem::path& path);
std::string lut_csv(std::span<const OpLatencyTable> tables);
void save_lut_csv(const std::filesystem::path& path,
                  std::span<const OpLatencyTable> tables);

// Throws ValidationError when `device` is absent.
const OpLatencyTable& find_lut(std::span<const OpLatencyTable> tables,
                               const std::string& device);

}  // namespace fewlat
