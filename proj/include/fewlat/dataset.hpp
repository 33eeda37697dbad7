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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fewlat/archspace.hpp"
#include "fewlat/lut.hpp"

namespace fewlat {

enum class DeviceClass { kCpu, kGpu };

std::string_view device_class_name(DeviceClass c);
DeviceClass device_class_from_name(std::string_view name);

struct DeviceSpec {
  std::string name;
  DeviceClass device_class = DeviceClass::kCpu;
  long long core_count = 0;
  double max_clock_ghz = 0.0;
  double tdp_watts = 0.0;
};

void validate(const DeviceSpec& spec);

inline constexpr int kNumCounters = 10;

// Per-device hardware counter descriptor; the ten columns are opaque.
struct DeviceCounters {
  std::string device;
  std::array<double, kNumCounters> values{};
};

void validate(const DeviceCounters& counters);

// (device, arch_index) -> latency in milliseconds. Devices keep their
// insertion order; architectures are stored densely per device.
class LatencyTable {
 public:
  // Throws ValidationError on a non-positive/non-finite latency, a bad
  // index, or a duplicate (device, arch) pair.
  void add(const std::string& device, int arch_index, double latency_ms);

  const std::vector<std::string>& devices() const { return devices_; }
  bool has_device(const std::string& device) const;
  // -1 when absent.
  int device_index(const std::string& device) const;

  std::optional<double> latency(const std::string& device,
                                int arch_index) const;
  // NaN when absent. `device` is an index from device_index().
  double latency_at(int device, int arch_index) const {
    return dense_[device][arch_index];
  }
  // Ascending architecture indices measured on `device`.
  std::vector<int> archs(const std::string& device) const;
  std::vector<LatencyRecord> records(const std::string& device) const;
  // Architectures measured on every device in `devices`.
  std::vector<int> common_archs(std::span<const std::string> devices) const;

  std::size_t size() const;
  std::size_t size(const std::string& device) const;

  LatencyTable subset(std::span<const std::string> devices) const;

 private:
  int require(const std::string& device) const;

  std::vector<std::string> devices_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::vector<double>> dense_;
  std::vector<std::size_t> counts_;
};

// devices.csv: `name,class,cores,clock_ghz,tdp_w`
std::vector<DeviceSpec> load_device_specs(const std::filesystem::path& path);
std::string device_specs_csv(std::span<const DeviceSpec> specs);
const DeviceSpec& find_spec(std::span<const DeviceSpec> specs,
                            const std::string& device);

// counters.csv: `device,c0,...,c9`
std::vector<DeviceCounters> load_counters(const std::filesystem::path& path);
std::string counters_csv(std::span<const DeviceCounters> counters);
const DeviceCounters& find_counters(std::span<const DeviceCounters> counters,
                                    const std::string& device);

// latency.csv / adaptation.csv: `device,arch_index,latency_ms`. When
// `known_devices` is given, rows naming any other device are rejected.
LatencyTable load_latency_table(
    const std::filesystem::path& path,
    const std::vector<DeviceSpec>* known_devices = nullptr);
LatencyTable parse_latency_table(
    std::string_view text, const std::string& source_name,
    const std::vector<DeviceSpec>* known_devices = nullptr);
std::string latency_csv(const LatencyTable& table);

struct SynthConfig {
  int n_devices = 6;
  int n_archs = 500;
  double noise_sigma = 0.05;
  std::array<double, 2> parallelism_range{0.1, 0.4};
  std::uint64_t seed = 0;
};

void validate(const SynthConfig& cfg);
SynthConfig synth_config_from_json(std::string_view json_text);
std::string synth_config_to_json(const SynthConfig& cfg);

struct SynthBundle {
  std::vector<DeviceSpec> specs;
  std::vector<DeviceCounters> counters;
  std::vector<OpLatencyTable> luts;  // generating per-op costs
  std::vector<double> parallelism;   // rho per device, same order as specs
  LatencyTable latency;
};

// Deterministic in cfg.seed. Per device d: latency(a) =
//   (sum_e cost_d[op_e]) * (1 - rho_d * active(a) / 6) * (1 + eta),
// eta ~ Normal(0, sigma^2) truncated to (-0.5, 0.5). The first half of the
// devices are CPU-like, the rest GPU-like. CPUs take rho from the lower half
// of parallelism_range and GPUs from the upper half, placed mostly by core
// count within the class range.
SynthBundle synth_generate(const SynthConfig& cfg);

// Writes devices.csv, counters.csv, lut.csv and latency.csv into `dir`.
void save_bundle(const SynthBundle& bundle, const std::filesystem::path& dir);
// Reads the same four files; lut.csv is optional.
SynthBundle load_bundle(const std::filesystem::path& dir);

struct PoolSample {
  std::string device;
  int arch_index = 0;
  double latency_ms = 0.0;
};

struct TrainAdaptSplit {
  std::string target;
  std::vector<std::string> train_devices;
  std::vector<int> train_archs;  // shared by every training device
  std::vector<PoolSample> train;
  std::vector<LatencyRecord> adaptation;
  std::vector<LatencyRecord> evaluation;
};

// Samples the same `n_train_archs` architectures from every non-target
// device and `k_adapt` adaptation records from the target; evaluation is
// the rest of the target table.
TrainAdaptSplit split_train_adapt(const LatencyTable& table,
                                  const std::string& target, int n_train_archs,
                                  int k_adapt, std::uint64_t seed);

// Same, with the adaptation architectures chosen by the caller.
TrainAdaptSplit split_train_adapt(const LatencyTable& table,
                                  const std::string& target, int n_train_archs,
                                  std::span<const int> adaptation_archs,
                                  std::uint64_t seed);

}  // namespace fewlat
