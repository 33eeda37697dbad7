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

#include "fewlat/prior.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "fewlat/csv.hpp"
#include "fewlat/errors.hpp"
#include "fewlat/metrics.hpp"

namespace fewlat {

Neighborhood discover_neighborhood(
    const LatencyTable& table, std::span<const std::string> training_devices,
    int reference, double delta, int max_size, MembershipRule rule) {
  if (training_devices.empty()) {
    throw ValidationError("discover_neighborhood: no training devices");
  }
  if (!(delta >= 0.0)) {
    throw ValidationError("discover_neighborhood: delta must be >= 0");
  }
  if (max_size < 1) {
    throw ValidationError("discover_neighborhood: max_size must be >= 1");
  }
  std::vector<int> dev;
  std::vector<double> ref_ms;
  for (const auto& name : training_devices) {
    auto ms = table.latency(name, reference);
    if (!ms) {
      throw ValidationError("reference architecture " +
                            std::to_string(reference) +
                            " not measured on training device '" + name + "'");
    }
    dev.push_back(table.device_index(name));
    ref_ms.push_back(*ms);
  }

  const std::size_t n_dev = dev.size();
  struct Candidate {
    double worst_gap;
    int arch;
  };
  std::vector<Candidate> found;
  for (int a : table.common_archs(training_devices)) {
    if (a == reference) continue;
    std::size_t within = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < n_dev; ++i) {
      double diff = std::abs(table.latency_at(dev[i], a) - ref_ms[i]);
      if (diff <= delta * ref_ms[i]) ++within;
      worst = std::max(worst, diff / ref_ms[i]);
    }
    bool member = rule == MembershipRule::kAllDevices ? within == n_dev
                                                      : 2 * within > n_dev;
    if (member) found.push_back({worst, a});
  }
  const std::size_t keep = static_cast<std::size_t>(max_size - 1);
  if (found.size() > keep) {
    std::sort(found.begin(), found.end(),
              [](const Candidate& x, const Candidate& y) {
                if (x.worst_gap != y.worst_gap) return x.worst_gap < y.worst_gap;
                return x.arch < y.arch;
              });
    found.resize(keep);
  }

  Neighborhood n;
  n.reference = reference;
  n.delta = delta;
  n.members.push_back(reference);
  for (const auto& c : found) n.members.push_back(c.arch);
  std::sort(n.members.begin(), n.members.end());
  return n;
}

Neighborhood discover_neighborhood(
    const LatencyTable& table, std::span<const std::string> training_devices,
    int reference, const NeighborhoodOptions& opts) {
  double delta = opts.delta;
  Neighborhood n = discover_neighborhood(table, training_devices, reference,
                                         delta, opts.max_size, opts.rule);
  while (opts.auto_widen && static_cast<int>(n.members.size()) < opts.min_size &&
         delta > 0.0 && 2.0 * delta <= opts.max_delta * (1.0 + 1e-12)) {
    delta *= 2.0;
    n = discover_neighborhood(table, training_devices, reference, delta,
                              opts.max_size, opts.rule);
  }
  return n;
}

std::vector<int> select_reference_archs(
    const LatencyTable& table, std::span<const std::string> training_devices,
    int k, std::uint64_t seed, std::span<const int> restrict_to) {
  if (k < 1) throw ValidationError("select_reference_archs: k must be >= 1");
  std::vector<int> candidates = table.common_archs(training_devices);
  if (!restrict_to.empty()) {
    std::vector<int> allowed(restrict_to.begin(), restrict_to.end());
    std::sort(allowed.begin(), allowed.end());
    std::erase_if(candidates, [&](int a) {
      return !std::binary_search(allowed.begin(), allowed.end(), a);
    });
  }
  if (static_cast<std::size_t>(k) > candidates.size()) {
    throw ValidationError("select_reference_archs: k=" + std::to_string(k) +
                          " exceeds the " + std::to_string(candidates.size()) +
                          " candidate architectures");
  }
  std::vector<int> dev;
  for (const auto& name : training_devices) dev.push_back(table.device_index(name));

  std::vector<std::pair<double, int>> by_mean;
  by_mean.reserve(candidates.size());
  for (int a : candidates) {
    double sum = 0.0;
    for (int d : dev) sum += table.latency_at(d, a);
    by_mean.emplace_back(sum / static_cast<double>(dev.size()), a);
  }
  std::sort(by_mean.begin(), by_mean.end());

  std::mt19937_64 rng(seed);
  const std::size_t n = by_mean.size();
  std::vector<int> refs;
  for (int b = 0; b < k; ++b) {
    std::size_t lo = n * static_cast<std::size_t>(b) / k;
    std::size_t hi = n * static_cast<std::size_t>(b + 1) / k;
    std::uniform_int_distribution<std::size_t> pick(lo, hi - 1);
    refs.push_back(by_mean[pick(rng)].second);
  }
  return refs;
}

VirtualSynthesis synthesize_virtual_examples(Neighborhood& nbhd,
                                             const OpLatencyTable& lut,
                                             double measured_latency_ms) {
  if (!(measured_latency_ms > 0.0) || !std::isfinite(measured_latency_ms)) {
    throw ValidationError("measured latency must be positive and finite");
  }
  if (nbhd.members.empty()) {
    throw ValidationError("neighborhood of " + std::to_string(nbhd.reference) +
                          " has no members");
  }
  std::vector<double> lut_ms;
  lut_ms.reserve(nbhd.members.size());
  for (int a : nbhd.members) lut_ms.push_back(lut_latency(lut, a));
  const double mean =
      std::accumulate(lut_ms.begin(), lut_ms.end(), 0.0) /
      static_cast<double>(lut_ms.size());

  VirtualSynthesis out;
  out.mean_lut_ms = mean;
  out.examples.push_back(
      {nbhd.reference, measured_latency_ms, nbhd.reference, true});
  for (std::size_t i = 0; i < nbhd.members.size(); ++i) {
    int a = nbhd.members[i];
    if (a == nbhd.reference) continue;
    double label = lut_ms[i] - mean + measured_latency_ms;
    if (label > 0.0) {
      out.examples.push_back({a, label, nbhd.reference, false});
    } else {
      ++out.dropped;
    }
  }
  nbhd.measured_latency_ms = measured_latency_ms;
  nbhd.mean_lut_ms = mean;
  return out;
}

std::optional<double> neighborhood_lut_correlation(const Neighborhood& nbhd,
                                                   const OpLatencyTable& lut,
                                                   const LatencyTable& table,
                                                   const std::string& device) {
  if (nbhd.members.size() < 2) {
    throw ValidationError("neighborhood correlation needs >= 2 members");
  }
  std::vector<double> x, y;
  for (int a : nbhd.members) {
    auto ms = table.latency(device, a);
    if (!ms) {
      throw ValidationError("architecture " + std::to_string(a) +
                            " not measured on '" + device + "'");
    }
    x.push_back(lut_latency(lut, a));
    y.push_back(*ms);
  }
  return pearson(x, y);
}

std::string neighborhoods_csv(std::span<const Neighborhood> nbhds) {
  csv::Writer w({"reference", "arch_index", "delta"});
  for (const auto& n : nbhds) {
    for (int a : n.members) {
      w.field(n.reference).field(a).field(n.delta);
      w.end_row();
    }
  }
  return w.str();
}

std::vector<Neighborhood> load_neighborhoods(const std::filesystem::path& path) {
  const std::string src = path.string();
  csv::Table t = csv::read_file(path);
  csv::require_header(t, {"reference", "arch_index", "delta"}, src);
  std::vector<Neighborhood> out;
  std::map<long long, std::size_t> slot;
  for (const auto& row : t.rows) {
    long long ref = csv::parse_int(row.fields[0], row, src);
    long long a = csv::parse_int(row.fields[1], row, src);
    double delta = csv::parse_double(row.fields[2], row, src);
    if (!valid_arch_index(static_cast<int>(ref)) ||
        !valid_arch_index(static_cast<int>(a)) || ref != static_cast<int>(ref) ||
        a != static_cast<int>(a)) {
      throw ValidationError(src + ":" + std::to_string(row.line) +
                            ": arch index outside [0, 15624]");
    }
    auto [it, inserted] = slot.try_emplace(ref, out.size());
    if (inserted) {
      Neighborhood n;
      n.reference = static_cast<int>(ref);
      n.delta = delta;
      out.push_back(std::move(n));
    }
    out[it->second].members.push_back(static_cast<int>(a));
  }
  for (auto& n : out) {
    std::sort(n.members.begin(), n.members.end());
    n.members.erase(std::unique(n.members.begin(), n.members.end()),
                    n.members.end());
    if (!std::binary_search(n.members.begin(), n.members.end(), n.reference)) {
      throw ValidationError(src + ": neighborhood " +
                            std::to_string(n.reference) +
                            " does not contain its reference");
    }
  }
  return out;
}

std::string virtual_csv(std::span<const VirtualExample> examples) {
  csv::Writer w({"arch_index", "label_ms", "neighborhood_ref", "is_measured"});
  for (const auto& v : examples) {
    w.field(v.arch_index)
        .field(v.label_ms)
        .field(v.neighborhood_ref)
        .field(v.is_measured ? 1 : 0);
    w.end_row();
  }
  return w.str();
}

std::vector<VirtualExample> load_virtual(const std::filesystem::path& path) {
  const std::string src = path.string();
  csv::Table t = csv::read_file(path);
  csv::require_header(
      t, {"arch_index", "label_ms", "neighborhood_ref", "is_measured"}, src);
  std::vector<VirtualExample> out;
  for (const auto& row : t.rows) {
    VirtualExample v;
    long long a = csv::parse_int(row.fields[0], row, src);
    long long ref = csv::parse_int(row.fields[2], row, src);
    long long measured = csv::parse_int(row.fields[3], row, src);
    if (!valid_arch_index(static_cast<int>(a)) ||
        !valid_arch_index(static_cast<int>(ref))) {
      throw ValidationError(src + ":" + std::to_string(row.line) +
                            ": arch index outside [0, 15624]");
    }
    if (measured != 0 && measured != 1) {
      throw ValidationError(src + ":" + std::to_string(row.line) +
                            ": is_measured must be 0 or 1");
    }
    v.arch_index = static_cast<int>(a);
    v.label_ms = csv::parse_double(row.fields[1], row, src);
    v.neighborhood_ref = static_cast<int>(ref);
    v.is_measured = measured == 1;
    if (!(v.label_ms > 0.0) || !std::isfinite(v.label_ms)) {
      throw ValidationError(src + ":" + std::to_string(row.line) +
                            ": label_ms must be positive");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace fewlat
