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

#include "fewlat/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "fewlat/csv.hpp"
#include "fewlat/errors.hpp"

namespace fewlat {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string where(const std::string& src, const csv::Row& row) {
  return src + ":" + std::to_string(row.line);
}

// Base per-op costs in ms for a device of unit speed, indexed by op id.
// CPUs are dominated by the 3x3 conv; GPUs flatten the gap between ops.
constexpr std::array<double, kNumOps> kCpuBaseCost = {0.0, 0.08, 0.9, 3.2,
                                                      0.45};
constexpr std::array<double, kNumOps> kGpuBaseCost = {0.0, 0.05, 0.22, 0.40,
                                                      0.30};
constexpr double kNoneCostMs = 1e-3;
constexpr double kCostJitter = 0.08;
constexpr double kCounterNoise = 0.02;

// counters = offset + slope * (cores / 1000, clock_ghz, tdp / 100)
constexpr std::array<double, kNumCounters> kCounterOffset = {
    1.0, 2.0, 0.5, 0.2, 1.2, 0.1, 3.0, 0.4, 0.3, 0.6};
constexpr std::array<std::array<double, 3>, kNumCounters> kCounterSlope = {{
    {0.5, 2.0, 0.3},
    {1.5, 1.0, 0.2},
    {0.8, 0.4, 0.6},
    {0.3, 0.1, 0.9},
    {0.2, 0.7, 0.1},
    {0.05, 0.2, 0.4},
    {2.0, 0.5, 0.5},
    {0.6, 0.3, 0.2},
    {0.1, 0.5, 0.3},
    {0.4, 0.2, 0.8},
}};

double round_to(double x, double step) { return std::round(x / step) * step; }

}  // namespace

std::string_view device_class_name(DeviceClass c) {
  return c == DeviceClass::kCpu ? "CPU" : "GPU";
}

DeviceClass device_class_from_name(std::string_view name) {
  if (name == "CPU") return DeviceClass::kCpu;
  if (name == "GPU") return DeviceClass::kGpu;
  throw ValidationError("device class must be CPU or GPU, got '" +
                        std::string(name) + "'");
}

void validate(const DeviceSpec& spec) {
  if (spec.name.empty()) throw ValidationError("device name is empty");
  if (spec.core_count <= 0 || !(spec.max_clock_ghz > 0.0) ||
      !(spec.tdp_watts > 0.0) || !std::isfinite(spec.max_clock_ghz) ||
      !std::isfinite(spec.tdp_watts)) {
    throw ValidationError("device '" + spec.name +
                          "': cores, clock and TDP must be positive");
  }
}

void validate(const DeviceCounters& counters) {
  for (double v : counters.values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ValidationError("counters for '" + counters.device +
                            "' must be finite and non-negative");
    }
  }
}

// --- LatencyTable -----------------------------------------------------------

void LatencyTable::add(const std::string& device, int arch_index,
                       double latency_ms) {
  if (!valid_arch_index(arch_index)) {
    throw ValidationError("architecture index " + std::to_string(arch_index) +
                          " outside [0, 15624]");
  }
  if (!std::isfinite(latency_ms) || latency_ms <= 0.0) {
    throw ValidationError("latency for (" + device + ", " +
                          std::to_string(arch_index) +
                          ") must be positive and finite");
  }
  auto [it, inserted] =
      index_.try_emplace(device, static_cast<int>(devices_.size()));
  if (inserted) {
    devices_.push_back(device);
    dense_.emplace_back(kNumArchs, kNan);
    counts_.push_back(0);
  }
  double& slot = dense_[it->second][arch_index];
  if (!std::isnan(slot)) {
    throw ValidationError("duplicate latency for (" + device + ", " +
                          std::to_string(arch_index) + ")");
  }
  slot = latency_ms;
  ++counts_[it->second];
}

bool LatencyTable::has_device(const std::string& device) const {
  return index_.contains(device);
}

int LatencyTable::device_index(const std::string& device) const {
  auto it = index_.find(device);
  return it == index_.end() ? -1 : it->second;
}

int LatencyTable::require(const std::string& device) const {
  int d = device_index(device);
  if (d < 0) throw ValidationError("unknown device '" + device + "'");
  return d;
}

std::optional<double> LatencyTable::latency(const std::string& device,
                                            int arch_index) const {
  int d = device_index(device);
  if (d < 0 || !valid_arch_index(arch_index)) return std::nullopt;
  double v = dense_[d][arch_index];
  if (std::isnan(v)) return std::nullopt;
  return v;
}

std::vector<int> LatencyTable::archs(const std::string& device) const {
  const auto& row = dense_[require(device)];
  std::vector<int> out;
  for (int a = 0; a < kNumArchs; ++a) {
    if (!std::isnan(row[a])) out.push_back(a);
  }
  return out;
}

std::vector<LatencyRecord> LatencyTable::records(
    const std::string& device) const {
  const auto& row = dense_[require(device)];
  std::vector<LatencyRecord> out;
  for (int a = 0; a < kNumArchs; ++a) {
    if (!std::isnan(row[a])) out.push_back({a, row[a]});
  }
  return out;
}

std::vector<int> LatencyTable::common_archs(
    std::span<const std::string> devices) const {
  std::vector<int> ids;
  for (const auto& d : devices) ids.push_back(require(d));
  std::vector<int> out;
  for (int a = 0; a < kNumArchs; ++a) {
    bool all = !ids.empty();
    for (int d : ids) all = all && !std::isnan(dense_[d][a]);
    if (all) out.push_back(a);
  }
  return out;
}

std::size_t LatencyTable::size() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

std::size_t LatencyTable::size(const std::string& device) const {
  return counts_[require(device)];
}

LatencyTable LatencyTable::subset(std::span<const std::string> devices) const {
  LatencyTable out;
  for (const auto& name : devices) {
    int d = require(name);
    for (int a = 0; a < kNumArchs; ++a) {
      if (!std::isnan(dense_[d][a])) out.add(name, a, dense_[d][a]);
    }
  }
  return out;
}

// --- file IO ----------------------------------------------------------------

std::vector<DeviceSpec> load_device_specs(const std::filesystem::path& path) {
  const std::string src = path.string();
  csv::Table t = csv::read_file(path);
  csv::require_header(t, {"name", "class", "cores", "clock_ghz", "tdp_w"},
                      src);
  std::vector<DeviceSpec> out;
  std::set<std::string> names;
  for (const auto& row : t.rows) {
    DeviceSpec s;
    s.name = row.fields[0];
    try {
      s.device_class = device_class_from_name(row.fields[1]);
    } catch (const ValidationError& e) {
      throw ParseError(where(src, row) + ": " + e.what());
    }
    s.core_count = csv::parse_int(row.fields[2], row, src);
    s.max_clock_ghz = csv::parse_double(row.fields[3], row, src);
    s.tdp_watts = csv::parse_double(row.fields[4], row, src);
    try {
      validate(s);
    } catch (const ValidationError& e) {
      throw ValidationError(where(src, row) + ": " + e.what());
    }
    if (!names.insert(s.name).second) {
      throw ValidationError(where(src, row) + ": duplicate device '" + s.name +
                            "'");
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string device_specs_csv(std::span<const DeviceSpec> specs) {
  csv::Writer w({"name", "class", "cores", "clock_ghz", "tdp_w"});
  for (const auto& s : specs) {
    w.field(s.name)
        .field(device_class_name(s.device_class))
        .field(s.core_count)
        .field(s.max_clock_ghz)
        .field(s.tdp_watts);
    w.end_row();
  }
  return w.str();
}

const DeviceSpec& find_spec(std::span<const DeviceSpec> specs,
                            const std::string& device) {
  for (const auto& s : specs) {
    if (s.name == device) return s;
  }
  throw ValidationError("no device spec for '" + device + "'");
}

namespace {

std::vector<std::string> counter_header() {
  std::vector<std::string> h{"device"};
  for (int i = 0; i < kNumCounters; ++i) h.push_back("c" + std::to_string(i));
  return h;
}

}  // namespace

std::vector<DeviceCounters> load_counters(const std::filesystem::path& path) {
  const std::string src = path.string();
  csv::Table t = csv::read_file(path);
  csv::require_header(t, counter_header(), src);
  std::vector<DeviceCounters> out;
  std::set<std::string> names;
  for (const auto& row : t.rows) {
    DeviceCounters c;
    c.device = row.fields[0];
    for (int i = 0; i < kNumCounters; ++i) {
      c.values[i] = csv::parse_double(row.fields[i + 1], row, src);
    }
    try {
      validate(c);
    } catch (const ValidationError& e) {
      throw ValidationError(where(src, row) + ": " + e.what());
    }
    if (!names.insert(c.device).second) {
      throw ValidationError(where(src, row) + ": duplicate device '" +
                            c.device + "'");
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::string counters_csv(std::span<const DeviceCounters> counters) {
  csv::Writer w(counter_header());
  for (const auto& c : counters) {
    w.field(c.device);
    for (double v : c.values) w.field(v);
    w.end_row();
  }
  return w.str();
}

const DeviceCounters& find_counters(std::span<const DeviceCounters> counters,
                                    const std::string& device) {
  for (const auto& c : counters) {
    if (c.device == device) return c;
  }
  throw ValidationError("no counters for device '" + device + "'");
}

LatencyTable parse_latency_table(std::string_view text,
                                 const std::string& source_name,
                                 const std::vector<DeviceSpec>* known_devices) {
  csv::Table t = csv::parse(text, source_name);
  csv::require_header(t, {"device", "arch_index", "latency_ms"}, source_name);
  std::set<std::string> known;
  if (known_devices) {
    for (const auto& s : *known_devices) known.insert(s.name);
  }
  LatencyTable table;
  for (const auto& row : t.rows) {
    const std::string& dev = row.fields[0];
    if (known_devices && !known.contains(dev)) {
      throw ValidationError(where(source_name, row) + ": unknown device '" +
                            dev + "'");
    }
    long long arch = csv::parse_int(row.fields[1], row, source_name);
    double ms = csv::parse_double(row.fields[2], row, source_name);
    if (arch < 0 || arch >= kNumArchs) {
      throw ValidationError(where(source_name, row) +
                            ": arch_index outside [0, 15624]");
    }
    try {
      table.add(dev, static_cast<int>(arch), ms);
    } catch (const ValidationError& e) {
      throw ValidationError(where(source_name, row) + ": " + e.what());
    }
  }
  return table;
}

LatencyTable load_latency_table(const std::filesystem::path& path,
                                const std::vector<DeviceSpec>* known_devices) {
  return parse_latency_table(csv::read_text(path), path.string(),
                             known_devices);
}

std::string latency_csv(const LatencyTable& table) {
  csv::Writer w({"device", "arch_index", "latency_ms"});
  for (const auto& dev : table.devices()) {
    for (const auto& r : table.records(dev)) {
      w.field(dev).field(r.arch_index).field(r.latency_ms);
      w.end_row();
    }
  }
  return w.str();
}

// --- synthetic generator ----------------------------------------------------

void validate(const SynthConfig& cfg) {
  if (cfg.n_devices < 1) throw ValidationError("n_devices must be >= 1");
  if (cfg.n_archs < 1 || cfg.n_archs > kNumArchs) {
    throw ValidationError("n_archs must be in [1, 15625]");
  }
  if (!(cfg.noise_sigma >= 0.0) || !std::isfinite(cfg.noise_sigma)) {
    throw ValidationError("noise_sigma must be >= 0");
  }
  const auto [lo, hi] = cfg.parallelism_range;
  if (!(lo >= 0.0) || !(hi < 1.0) || lo > hi) {
    throw ValidationError("parallelism_range must satisfy 0 <= lo <= hi < 1");
  }
}

SynthConfig synth_config_from_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("synth config: ") + e.what());
  }
  SynthConfig cfg;
  try {
    cfg.n_devices = j.value("n_devices", cfg.n_devices);
    cfg.n_archs = j.value("n_archs", cfg.n_archs);
    cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
    if (j.contains("parallelism_range")) {
      cfg.parallelism_range = j.at("parallelism_range").get<std::array<double, 2>>();
    }
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("synth config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

std::string synth_config_to_json(const SynthConfig& cfg) {
  nlohmann::json j;
  j["n_devices"] = cfg.n_devices;
  j["n_archs"] = cfg.n_archs;
  j["noise_sigma"] = cfg.noise_sigma;
  j["parallelism_range"] = cfg.parallelism_range;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

SynthBundle synth_generate(const SynthConfig& cfg) {
  validate(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  std::vector<int> archs;
  if (cfg.n_archs == kNumArchs) {
    archs.resize(kNumArchs);
    std::iota(archs.begin(), archs.end(), 0);
  } else {
    std::vector<int> all(kNumArchs);
    std::iota(all.begin(), all.end(), 0);
    std::sample(all.begin(), all.end(), std::back_inserter(archs), cfg.n_archs,
                rng);
  }

  SynthBundle b;
  const int n_cpu = (cfg.n_devices + 1) / 2;
  const auto [rho_lo, rho_hi] = cfg.parallelism_range;
  const double rho_mid = 0.5 * (rho_lo + rho_hi);
  int cpu_seen = 0;
  int gpu_seen = 0;
  for (int d = 0; d < cfg.n_devices; ++d) {
    const bool cpu = d < n_cpu;
    DeviceSpec s;
    s.device_class = cpu ? DeviceClass::kCpu : DeviceClass::kGpu;
    s.name = cpu ? "synth_cpu" + std::to_string(cpu_seen++)
                 : "synth_gpu" + std::to_string(gpu_seen++);
    double speed;
    if (cpu) {
      s.core_count = std::uniform_int_distribution<int>(4, 28)(rng);
      s.max_clock_ghz = round_to(uniform(3.0, 5.0), 0.01);
      s.tdp_watts = round_to(uniform(65.0, 205.0), 1.0);
      speed = std::sqrt(64.0 / (s.core_count * s.max_clock_ghz));
    } else {
      s.core_count = std::uniform_int_distribution<int>(1024, 5120)(rng);
      s.max_clock_ghz = round_to(uniform(1.3, 1.9), 0.01);
      s.tdp_watts = round_to(uniform(120.0, 300.0), 1.0);
      speed = std::sqrt(4800.0 / (s.core_count * s.max_clock_ghz));
    }

    OpLatencyTable lut{s.name, {}};
    const auto& base = cpu ? kCpuBaseCost : kGpuBaseCost;
    lut.cost_ms[0] = kNoneCostMs;
    for (int k = 1; k < kNumOps; ++k) {
      lut.cost_ms[k] = base[k] * speed * std::exp(kCostJitter * gauss(rng));
    }

    // Wider devices parallelize more: rho sits in the class half of the
    // range at a position mostly set by core count.
    const double core_pos =
        cpu ? (s.core_count - 4) / 24.0 : (s.core_count - 1024) / 4096.0;
    const double pos = std::clamp(0.7 * core_pos + 0.3 * uniform(0.0, 1.0), 0.0, 1.0);
    const double rho = cpu ? rho_lo + pos * (rho_mid - rho_lo)
                           : rho_mid + pos * (rho_hi - rho_mid);

    DeviceCounters counters{s.name, {}};
    const std::array<double, 3> feat = {s.core_count / 1000.0,
                                        s.max_clock_ghz, s.tdp_watts / 100.0};
    for (int i = 0; i < kNumCounters; ++i) {
      double v = kCounterOffset[i];
      for (int k = 0; k < 3; ++k) v += kCounterSlope[i][k] * feat[k];
      v *= 1.0 + kCounterNoise * gauss(rng);
      counters.values[i] = std::max(v, 0.0);
    }

    b.specs.push_back(std::move(s));
    b.luts.push_back(std::move(lut));
    b.parallelism.push_back(rho);
    b.counters.push_back(std::move(counters));
  }

  for (int d = 0; d < cfg.n_devices; ++d) {
    const OpLatencyTable& lut = b.luts[d];
    for (int a : archs) {
      CellArchitecture arch = arch_from_index(a);
      double eta = 0.0;
      if (cfg.noise_sigma > 0.0) {
        do {
          eta = cfg.noise_sigma * gauss(rng);
        } while (!(eta > -0.5 && eta < 0.5));
      }
      double ms = lut_latency(lut, arch) *
                  (1.0 - b.parallelism[d] * active_edges(arch) / 6.0) *
                  (1.0 + eta);
      b.latency.add(b.specs[d].name, a, ms);
    }
  }
  return b;
}

void save_bundle(const SynthBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  csv::write_text(dir / "devices.csv", device_specs_csv(bundle.specs));
  csv::write_text(dir / "counters.csv", counters_csv(bundle.counters));
  csv::write_text(dir / "lut.csv", lut_csv(bundle.luts));
  csv::write_text(dir / "latency.csv", latency_csv(bundle.latency));
}

SynthBundle load_bundle(const std::filesystem::path& dir) {
  SynthBundle b;
  b.specs = load_device_specs(dir / "devices.csv");
  b.counters = load_counters(dir / "counters.csv");
  if (std::filesystem::exists(dir / "lut.csv")) {
    b.luts = load_lut_csv(dir / "lut.csv");
  }
  b.latency = load_latency_table(dir / "latency.csv", &b.specs);
  return b;
}

// --- splits -----------------------------------------------------------------

TrainAdaptSplit split_train_adapt(const LatencyTable& table,
                                  const std::string& target, int n_train_archs,
                                  std::span<const int> adaptation_archs,
                                  std::uint64_t seed) {
  if (!table.has_device(target)) {
    throw ValidationError("target device '" + target + "' not in table");
  }
  TrainAdaptSplit split;
  split.target = target;
  for (const auto& d : table.devices()) {
    if (d != target) split.train_devices.push_back(d);
  }
  std::vector<int> common = table.common_archs(split.train_devices);
  if (n_train_archs < 0 ||
      static_cast<std::size_t>(n_train_archs) > common.size()) {
    throw ValidationError("n_train_archs=" + std::to_string(n_train_archs) +
                          " exceeds the " + std::to_string(common.size()) +
                          " architectures shared by the training devices");
  }
  std::mt19937_64 rng(seed);
  std::sample(common.begin(), common.end(),
              std::back_inserter(split.train_archs), n_train_archs, rng);
  for (const auto& d : split.train_devices) {
    for (int a : split.train_archs) {
      split.train.push_back({d, a, *table.latency(d, a)});
    }
  }

  std::set<int> adapt;
  for (int a : adaptation_archs) {
    auto ms = table.latency(target, a);
    if (!ms) {
      throw ValidationError("adaptation architecture " + std::to_string(a) +
                            " not measured on '" + target + "'");
    }
    if (!adapt.insert(a).second) {
      throw ValidationError("adaptation architecture " + std::to_string(a) +
                            " listed twice");
    }
    split.adaptation.push_back({a, *ms});
  }
  for (const auto& r : table.records(target)) {
    if (!adapt.contains(r.arch_index)) split.evaluation.push_back(r);
  }
  return split;
}

TrainAdaptSplit split_train_adapt(const LatencyTable& table,
                                  const std::string& target, int n_train_archs,
                                  int k_adapt, std::uint64_t seed) {
  if (!table.has_device(target)) {
    throw ValidationError("target device '" + target + "' not in table");
  }
  std::vector<int> target_archs = table.archs(target);
  if (k_adapt < 0 || static_cast<std::size_t>(k_adapt) > target_archs.size()) {
    throw ValidationError("k_adapt=" + std::to_string(k_adapt) +
                          " exceeds the " + std::to_string(target_archs.size()) +
                          " records of '" + target + "'");
  }
  // Separate stream from the training-architecture draw.
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<int> adapt;
  std::sample(target_archs.begin(), target_archs.end(),
              std::back_inserter(adapt), k_adapt, rng);
  return split_train_adapt(table, target, n_train_archs, adapt, seed);
}

}  // namespace fewlat
