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

#include "fewlat/lodo.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <set>

#include "fewlat/csv.hpp"
#include "fewlat/errors.hpp"
#include "fewlat/metrics.hpp"

namespace fewlat {

MethodConfig method_config(std::string_view name) {
  if (name == "maple_x") return {"maple_x", true, WeightMode::kHardware, true};
  if (name == "maple_x1") return {"maple_x1", true, WeightMode::kUniform, true};
  if (name == "maple_baseline") {
    return {"maple_baseline", false, WeightMode::kAdaptationEmphasis, true};
  }
  if (name == "lut_only") return {"lut_only", false, WeightMode::kUniform, false};
  throw ValidationError("unknown method '" + std::string(name) + "'");
}

std::vector<MethodConfig> parse_methods(std::string_view comma_list) {
  std::vector<MethodConfig> out;
  std::size_t start = 0;
  while (start <= comma_list.size()) {
    std::size_t comma = comma_list.find(',', start);
    std::string_view tok = comma_list.substr(
        start, comma == std::string_view::npos ? std::string_view::npos
                                               : comma - start);
    if (!tok.empty()) out.push_back(method_config(tok));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw ValidationError("no methods given");
  return out;
}

void validate(const MethodConfig& m) {
  bool ok = true;
  if (m.name == "maple_x") {
    ok = m.use_virtual && m.weight_mode == WeightMode::kHardware && m.use_regressor;
  } else if (m.name == "maple_x1") {
    ok = m.use_virtual && m.weight_mode == WeightMode::kUniform && m.use_regressor;
  } else if (m.name == "maple_baseline") {
    ok = !m.use_virtual && m.weight_mode == WeightMode::kAdaptationEmphasis &&
         m.use_regressor;
  } else if (m.name == "lut_only") {
    ok = !m.use_regressor;
  }
  if (!ok) {
    throw ValidationError("method '" + m.name + "' has inconsistent settings");
  }
}

TargetLutSource target_lut_source_from_name(std::string_view name) {
  if (name == "provided") return TargetLutSource::kProvided;
  if (name == "nearest") return TargetLutSource::kNearest;
  throw ValidationError("target LUT source must be 'provided' or 'nearest'");
}

std::string_view target_lut_source_name(TargetLutSource s) {
  return s == TargetLutSource::kProvided ? "provided" : "nearest";
}

namespace {

struct FoldOutput {
  std::vector<LodoRow> rows;
  FoldSplitSummary split;
  std::vector<NeighborhoodRecord> neighborhoods;
  std::vector<DeviceWeight> weights;
};

[[noreturn]] void rethrow_with_context(const Error& e, const std::string& ctx) {
  throw Error(e.kind(), e.code(), ctx + ": " + e.what());
}

FoldOutput run_fold(const SynthBundle& data,
                    std::span<const MethodConfig> methods,
                    const LodoConfig& cfg, const std::string& target,
                    std::uint64_t fold_seed) {
  const LatencyTable& table = data.latency;
  FoldOutput out;

  // Reference selection happens first so the adaptation archs are chosen
  // from the stratified pool.
  std::vector<std::string> train_devices;
  for (const auto& d : table.devices()) {
    if (d != target) train_devices.push_back(d);
  }
  std::vector<int> target_archs = table.archs(target);
  std::vector<int> refs;
  if (cfg.k_adapt > 0) {
    refs = select_reference_archs(table, train_devices, cfg.k_adapt, fold_seed,
                                  target_archs);
  }
  TrainAdaptSplit split =
      split_train_adapt(table, target, cfg.n_train_archs, refs, fold_seed);

  std::set<int> adapt_set;
  for (const auto& r : split.adaptation) adapt_set.insert(r.arch_index);
  out.split.target_device = target;
  out.split.n_train_devices = split.train_devices.size();
  out.split.n_train_samples = split.train.size();
  out.split.n_adapt = split.adaptation.size();
  out.split.n_eval = split.evaluation.size();
  for (const auto& r : split.evaluation) {
    out.split.adapt_eval_overlap += adapt_set.count(r.arch_index);
  }
  if (split.evaluation.empty()) {
    throw ValidationError("no evaluation architectures left on '" + target + "'");
  }

  WeightConfig hw = cfg.weights;
  hw.mode = WeightMode::kHardware;
  out.weights = device_weights(data.specs, target, split.train_devices, hw);

  OpLatencyTable target_lut;
  if (cfg.target_lut == TargetLutSource::kProvided) {
    target_lut = find_lut(data.luts, target);
    out.split.lut_device = target;
  } else {
    auto nearest = std::min_element(
        out.weights.begin(), out.weights.end(),
        [](const DeviceWeight& a, const DeviceWeight& b) {
          return a.distance < b.distance;
        });
    std::vector<LatencyRecord> recs;
    for (const auto& s : split.train) {
      if (s.device == nearest->train_device) recs.push_back({s.arch_index, s.latency_ms});
    }
    target_lut = fit_lut(recs, target).table;
    out.split.lut_device = nearest->train_device;
  }

  // Neighborhoods and virtual labels, shared by every method that uses them.
  std::vector<TrainingSample> measured;
  for (const auto& r : split.adaptation) {
    measured.push_back({target, r.arch_index, r.latency_ms, SampleOrigin::kMeasured});
  }
  std::vector<TrainingSample> virtuals;
  const bool any_virtual = std::any_of(methods.begin(), methods.end(),
                                       [](const MethodConfig& m) { return m.use_virtual; });
  if (any_virtual) {
    std::string gate_device;
    if (cfg.gate.enabled) {
      auto nearest = std::min_element(
          out.weights.begin(), out.weights.end(),
          [](const DeviceWeight& a, const DeviceWeight& b) {
            return a.distance < b.distance;
          });
      gate_device = nearest->train_device;
    }
    for (const auto& r : split.adaptation) {
      NeighborhoodRecord rec;
      rec.target_device = target;
      rec.neighborhood = discover_neighborhood(table, split.train_devices,
                                               r.arch_index, cfg.neighborhood);
      if (cfg.gate.enabled && rec.neighborhood.members.size() >= 2) {
        rec.gate_correlation = neighborhood_lut_correlation(
            rec.neighborhood, target_lut, table, gate_device);
        rec.gated_out = !rec.gate_correlation ||
                        *rec.gate_correlation < cfg.gate.threshold;
      }
      VirtualSynthesis syn =
          synthesize_virtual_examples(rec.neighborhood, target_lut, r.latency_ms);
      rec.dropped = syn.dropped;
      if (!rec.gated_out) {
        for (const auto& v : syn.examples) {
          if (v.is_measured || adapt_set.contains(v.arch_index)) continue;
          virtuals.push_back({target, v.arch_index, v.label_ms, SampleOrigin::kVirtual});
          ++rec.n_virtual;
        }
      }
      out.neighborhoods.push_back(std::move(rec));
    }
  }

  std::vector<TrainingSample> pool;
  pool.reserve(split.train.size());
  for (const auto& s : split.train) {
    pool.push_back({s.device, s.arch_index, s.latency_ms, SampleOrigin::kPool});
  }
  std::map<std::string, const DeviceCounters*> counters;
  for (const auto& c : data.counters) counters[c.device] = &c;
  auto counters_of = [&](const std::string& d) -> const DeviceCounters& {
    auto it = counters.find(d);
    if (it == counters.end()) throw ValidationError("no counters for '" + d + "'");
    return *it->second;
  };

  std::vector<double> truths;
  truths.reserve(split.evaluation.size());
  for (const auto& r : split.evaluation) truths.push_back(r.latency_ms);

  for (const auto& method : methods) {
    try {
      validate(method);
      std::vector<double> preds;
      preds.reserve(split.evaluation.size());
      if (!method.use_regressor) {
        for (const auto& r : split.evaluation) {
          preds.push_back(lut_latency(target_lut, r.arch_index));
        }
      } else {
        std::vector<TrainingSample> target_samples = measured;
        if (method.use_virtual) {
          target_samples.insert(target_samples.end(), virtuals.begin(), virtuals.end());
        }
        WeightConfig wc = cfg.weights;
        wc.mode = method.weight_mode;
        auto weighted = assign_sample_weights(pool, target_samples, data.specs,
                                              target, wc);
        std::vector<RegressionSample> samples;
        samples.reserve(weighted.size());
        for (const auto& ws : weighted) {
          FeatureVector x = make_features(arch_from_index(ws.sample.arch_index),
                                          counters_of(ws.sample.device));
          samples.push_back({std::vector<double>(x.begin(), x.end()),
                             ws.sample.latency_ms, ws.weight});
        }
        TrainConfig tc = cfg.train;
        tc.seed = fold_seed;
        ModelParams model = train(samples, tc);
        const DeviceCounters& tcount = counters_of(target);
        for (const auto& r : split.evaluation) {
          FeatureVector x = make_features(arch_from_index(r.arch_index), tcount);
          preds.push_back(forward(model, x));
        }
      }
      out.rows.push_back({target, method.name, split.evaluation.size(),
                          error_bound_accuracy(preds, truths, 0.10),
                          mean_abs_rel_error(preds, truths)});
    } catch (const Error& e) {
      rethrow_with_context(e, "fold '" + target + "', method '" + method.name + "'");
    }
  }
  return out;
}

}  // namespace

LodoReport lodo_run(const SynthBundle& data,
                    std::span<const MethodConfig> methods,
                    const LodoConfig& cfg) {
  const auto& devices = data.latency.devices();
  if (devices.size() < 2) throw ValidationError("lodo_run needs >= 2 devices");
  if (methods.empty()) throw ValidationError("lodo_run: no methods");

  std::vector<std::pair<std::size_t, std::string>> folds;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    if (cfg.targets.empty() ||
        std::find(cfg.targets.begin(), cfg.targets.end(), devices[i]) !=
            cfg.targets.end()) {
      folds.emplace_back(i, devices[i]);
    }
  }
  for (const auto& t : cfg.targets) {
    if (!data.latency.has_device(t)) {
      throw ValidationError("lodo target '" + t + "' not in latency table");
    }
  }

  auto run = [&](std::size_t k) {
    const auto& [index, target] = folds[k];
    try {
      return run_fold(data, methods, cfg, target, cfg.seed ^ index);
    } catch (const Error& e) {
      if (std::string_view(e.what()).starts_with("fold ")) throw;
      rethrow_with_context(e, "fold '" + target + "'");
    }
  };

  std::vector<FoldOutput> outputs(folds.size());
  const std::size_t jobs = static_cast<std::size_t>(std::max(1, cfg.jobs));
  if (jobs == 1) {
    for (std::size_t k = 0; k < folds.size(); ++k) outputs[k] = run(k);
  } else {
    for (std::size_t start = 0; start < folds.size(); start += jobs) {
      std::vector<std::future<FoldOutput>> pending;
      for (std::size_t k = start; k < std::min(folds.size(), start + jobs); ++k) {
        pending.push_back(std::async(std::launch::async, run, k));
      }
      for (std::size_t j = 0; j < pending.size(); ++j) {
        outputs[start + j] = pending[j].get();
      }
    }
  }

  LodoReport report;
  report.seed = cfg.seed;
  for (auto& o : outputs) {
    report.rows.insert(report.rows.end(), o.rows.begin(), o.rows.end());
    report.splits.push_back(std::move(o.split));
    report.neighborhoods.insert(report.neighborhoods.end(),
                                o.neighborhoods.begin(), o.neighborhoods.end());
    report.weights.insert(report.weights.end(), o.weights.begin(), o.weights.end());
  }
  return report;
}

std::string lodo_report_csv(const LodoReport& report) {
  csv::Writer w({"target_device", "method", "n_eval", "acc10", "mare", "seed"});
  for (const auto& r : report.rows) {
    w.field(r.target_device)
        .field(r.method)
        .field(r.n_eval)
        .field(r.acc10)
        .field(r.mare)
        .field(std::string_view(std::to_string(report.seed)));
    w.end_row();
  }
  return w.str();
}

std::string splits_csv(const LodoReport& report) {
  csv::Writer w({"target_device", "n_train_devices", "n_train_samples", "n_adapt",
                 "n_eval", "adapt_eval_overlap", "lut_device"});
  for (const auto& s : report.splits) {
    w.field(s.target_device)
        .field(s.n_train_devices)
        .field(s.n_train_samples)
        .field(s.n_adapt)
        .field(s.n_eval)
        .field(s.adapt_eval_overlap)
        .field(s.lut_device);
    w.end_row();
  }
  return w.str();
}

std::string neighborhood_report_csv(const LodoReport& report) {
  csv::Writer w({"target_device", "reference", "size", "delta", "measured_ms",
                 "n_virtual", "dropped", "gate_r", "gated_out"});
  for (const auto& r : report.neighborhoods) {
    const Neighborhood& n = r.neighborhood;
    w.field(r.target_device)
        .field(n.reference)
        .field(n.members.size())
        .field(n.delta)
        .field(n.measured_latency_ms.value_or(0.0))
        .field(r.n_virtual)
        .field(r.dropped);
    if (r.gate_correlation) {
      w.field(*r.gate_correlation);
    } else {
      w.field(std::string_view("nan"));
    }
    w.field(r.gated_out ? 1 : 0);
    w.end_row();
  }
  return w.str();
}

std::vector<DensityRow> neighborhood_correlation_density(
    std::span<const Neighborhood> neighborhoods,
    std::span<const OpLatencyTable> luts, const LatencyTable& table) {
  std::vector<DensityRow> out;
  for (const auto& lut : luts) {
    if (!table.has_device(lut.device)) continue;
    for (const auto& n : neighborhoods) {
      if (n.members.size() < 2) continue;
      out.push_back({lut.device, n.reference, static_cast<int>(n.members.size()),
                     neighborhood_lut_correlation(n, lut, table, lut.device)});
    }
  }
  return out;
}

std::string density_csv(std::span<const DensityRow> rows) {
  csv::Writer w({"device", "reference", "size", "pearson_r"});
  for (const auto& r : rows) {
    w.field(r.device).field(r.reference).field(r.size);
    if (r.pearson_r) {
      w.field(*r.pearson_r);
    } else {
      w.field(std::string_view("nan"));
    }
    w.end_row();
  }
  return w.str();
}

}  // namespace fewlat
