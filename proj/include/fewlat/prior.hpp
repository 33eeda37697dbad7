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

// Latency neighborhoods across the training pool, and the virtual labels
// they induce on a target device through its layer-wise LUT.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fewlat/dataset.hpp"
#include "fewlat/lut.hpp"

namespace fewlat {

enum class MembershipRule {
  kAllDevices,  // bound must hold on every training device
  kMajority,    // bound must hold on more than half of them
};

struct Neighborhood {
  int reference = 0;
  std::vector<int> members;  // ascending, contains `reference`
  std::optional<double> measured_latency_ms;
  std::optional<double> mean_lut_ms;
  double delta = 0.0;  // bound that produced the member set
};

// Members are architectures m with |L_d(m) - L_d(ref)| <= delta * L_d(ref)
// on the training devices (per `rule`). Above `max_size`, keeps the
// reference plus the members with the smallest worst-case relative gap,
// ties broken by ascending index. Throws ValidationError when the reference
// is missing on any training device.
Neighborhood discover_neighborhood(
    const LatencyTable& table, std::span<const std::string> training_devices,
    int reference, double delta, int max_size,
    MembershipRule rule = MembershipRule::kAllDevices);

struct NeighborhoodOptions {
  double delta = 0.05;
  bool auto_widen = true;
  double max_delta = 0.20;  // widening doubles delta up to this value
  int min_size = 5;
  int max_size = 10;
  MembershipRule rule = MembershipRule::kAllDevices;
};

// Discovers with `opts.delta`, doubling it while the neighborhood is
// smaller than `min_size` and the doubled bound stays within `max_delta`.
Neighborhood discover_neighborhood(
    const LatencyTable& table, std::span<const std::string> training_devices,
    int reference, const NeighborhoodOptions& opts);

// k references stratified by mean training-pool latency: candidates (archs
// shared by the training devices, optionally intersected with
// `restrict_to`) are sorted by mean latency and cut into k equal-count
// bins, with one seeded draw per bin.
std::vector<int> select_reference_archs(
    const LatencyTable& table, std::span<const std::string> training_devices,
    int k, std::uint64_t seed, std::span<const int> restrict_to = {});

struct VirtualExample {
  int arch_index = 0;
  double label_ms = 0.0;
  int neighborhood_ref = 0;
  bool is_measured = false;
};

struct VirtualSynthesis {
  std::vector<VirtualExample> examples;  // reference first
  int dropped = 0;                       // members with label <= 0
  double mean_lut_ms = 0.0;
};

// label(a) = LUT(a) - mean_{m in members} LUT(m) + l_r for every member
// other than the reference; the reference is emitted with its measured
// latency. Caches l_r and the LUT mean on `nbhd`.
VirtualSynthesis synthesize_virtual_examples(Neighborhood& nbhd,
                                             const OpLatencyTable& lut,
                                             double measured_latency_ms);

// Pearson correlation between LUT and measured latency on `device` across
// the members; nullopt when either series is constant.
std::optional<double> neighborhood_lut_correlation(const Neighborhood& nbhd,
                                                   const OpLatencyTable& lut,
                                                   const LatencyTable& table,
                                                   const std::string& device);

// neighborhoods.csv: `reference,arch_index,delta`, one row per member.
std::string neighborhoods_csv(std::span<const Neighborhood> nbhds);
std::vector<Neighborhood> load_neighborhoods(const std::filesystem::path& path);

// virtual.csv: `arch_index,label_ms,neighborhood_ref,is_measured`.
std::string virtual_csv(std::span<const VirtualExample> examples);
std::vector<VirtualExample> load_virtual(const std::filesystem::path& path);

}  // namespace fewlat
