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

// fewlat: command-line front end for few-shot latency prediction.
//
// Exit codes: 0 success, 1 validation/parse error, 2 numerical failure.
// Errors go to stderr as a single line `error[CODE]: message`.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fewlat/archspace.hpp"
#include "fewlat/csv.hpp"
#include "fewlat/dataset.hpp"
#include "fewlat/errors.hpp"
#include "fewlat/lodo.hpp"
#include "fewlat/lut.hpp"
#include "fewlat/manifest.hpp"
#include "fewlat/metrics.hpp"
#include "fewlat/prior.hpp"
#include "fewlat/regressor.hpp"
#include "fewlat/weighting.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

using namespace fewlat;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    std::string tok = s.substr(start, comma == std::string::npos ? std::string::npos
                                                                 : comma - start);
    if (!tok.empty()) out.push_back(tok);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& tok : split_list(s)) {
    std::size_t dash = tok.find('-', 1);
    try {
      if (dash != std::string::npos) {
        int lo = std::stoi(tok.substr(0, dash));
        int hi = std::stoi(tok.substr(dash + 1));
        if (lo > hi) throw std::invalid_argument("range");
        for (int a = lo; a <= hi; ++a) out.push_back(a);
      } else {
        std::size_t used = 0;
        out.push_back(std::stoi(tok, &used));
        if (used != tok.size()) throw std::invalid_argument("trailing");
      }
    } catch (const std::logic_error&) {
      throw ParseError("cannot parse integer list entry '" + tok + "'");
    }
  }
  return out;
}

// "1" reads as a count on a terminal; keep a decimal point for metrics.
std::string metric_text(double v) {
  std::string s = csv::format_number(v);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

fs::path sidecar_manifest(const fs::path& out_file) {
  return fs::path(out_file.string() + ".manifest.json");
}

// Shared regressor and weighting flags.
struct TrainFlags {
  std::string hidden = "128,128";
  double learning_rate = 1e-3;
  int epochs = 300;
  int batch_size = 64;
  double momentum = 0.0;
  double weight_decay = 0.0;
  std::string transform = "log";
  std::string normalization = "zscore";
  double epsilon_floor = 1e-6;
  double multiplier = 1.0;
  double emphasis = 10.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--hidden", hidden, "Hidden layer widths, comma separated")
        ->capture_default_str();
    cmd->add_option("--lr", learning_rate, "Learning rate")->capture_default_str();
    cmd->add_option("--epochs", epochs, "Training epochs")->capture_default_str();
    cmd->add_option("--batch-size", batch_size, "Mini-batch size")
        ->capture_default_str();
    cmd->add_option("--momentum", momentum, "Heavy-ball momentum in [0,1)")
        ->capture_default_str();
    cmd->add_option("--weight-decay", weight_decay, "Decoupled weight decay")
        ->capture_default_str();
    cmd->add_option("--transform", transform, "Target transform: log|identity")
        ->capture_default_str();
    cmd->add_option("--normalization", normalization,
                    "Spec normalization: zscore|minmax|none")
        ->capture_default_str();
    cmd->add_option("--epsilon-floor", epsilon_floor, "Distance floor")
        ->capture_default_str();
    cmd->add_option("--target-multiplier", multiplier,
                    "Target sample weight relative to the largest pool weight")
        ->capture_default_str();
    cmd->add_option("--emphasis", emphasis,
                    "Measured-sample factor in adaptation_emphasis mode")
        ->capture_default_str();
  }

  TrainConfig train_config(std::uint64_t seed) const {
    TrainConfig tc;
    tc.hidden = parse_int_list(hidden);
    tc.learning_rate = learning_rate;
    tc.epochs = epochs;
    tc.batch_size = batch_size;
    tc.momentum = momentum;
    tc.weight_decay = weight_decay;
    tc.seed = seed;
    if (transform == "log") {
      tc.target_transform = TargetTransform::kLog;
    } else if (transform == "identity") {
      tc.target_transform = TargetTransform::kIdentity;
    } else {
      throw ValidationError("--transform must be log or identity");
    }
    return tc;
  }

  WeightConfig weight_config(WeightMode mode) const {
    WeightConfig wc;
    wc.mode = mode;
    wc.normalization = normalization_from_name(normalization);
    wc.epsilon_floor = epsilon_floor;
    wc.target_sample_multiplier = multiplier;
    wc.emphasis_factor = emphasis;
    validate(wc);
    return wc;
  }

  json snapshot() const {
    return {{"hidden", hidden},          {"lr", learning_rate},
            {"epochs", epochs},          {"batch_size", batch_size},
            {"momentum", momentum},      {"weight_decay", weight_decay},
            {"transform", transform},    {"normalization", normalization},
            {"epsilon_floor", epsilon_floor},
            {"target_multiplier", multiplier},
            {"emphasis", emphasis}};
  }
};

struct NeighborhoodFlags {
  double delta = 0.05;
  double max_delta = 0.20;
  int min_size = 5;
  int max_size = 10;
  bool no_widen = false;
  std::string rule = "all";

  void attach(CLI::App* cmd) {
    cmd->add_option("--delta", delta, "Relative latency bound")->capture_default_str();
    cmd->add_option("--max-size", max_size, "Maximum neighborhood size")
        ->capture_default_str();
    cmd->add_option("--min-size", min_size, "Widen delta until this size")
        ->capture_default_str();
    cmd->add_option("--max-delta", max_delta, "Upper limit for widening")
        ->capture_default_str();
    cmd->add_flag("--no-widen", no_widen, "Disable delta auto-widening");
    cmd->add_option("--rule", rule, "Membership rule: all|majority")
        ->capture_default_str();
  }

  NeighborhoodOptions options() const {
    NeighborhoodOptions o;
    o.delta = delta;
    o.max_delta = max_delta;
    o.min_size = min_size;
    o.max_size = max_size;
    o.auto_widen = !no_widen;
    if (rule == "all") {
      o.rule = MembershipRule::kAllDevices;
    } else if (rule == "majority") {
      o.rule = MembershipRule::kMajority;
    } else {
      throw ValidationError("--rule must be all or majority");
    }
    return o;
  }

  json snapshot() const {
    return {{"delta", delta},       {"max_delta", max_delta},
            {"min_size", min_size}, {"max_size", max_size},
            {"widen", !no_widen},   {"rule", rule}};
  }
};

// --- commands ---------------------------------------------------------------

void cmd_synth(const std::string& config_path, const fs::path& out) {
  SynthConfig cfg = synth_config_from_json(csv::read_text(config_path));
  SynthBundle b = synth_generate(cfg);
  save_bundle(b, out);
  RunManifest m;
  m.command = "synth";
  m.config_json = json{{"config", config_path}, {"out", out.string()},
                       {"synth", json::parse(synth_config_to_json(cfg))}}
                      .dump();
  m.add_input(config_path);
  m.seed = cfg.seed;
  for (const char* f : {"devices.csv", "counters.csv", "lut.csv", "latency.csv"}) {
    m.outputs.push_back((out / f).string());
  }
  write_manifest(m, out / "manifest.json");
}

void cmd_fit_lut(const std::string& latency_path, const std::string& device,
                 const fs::path& out) {
  LatencyTable table = load_latency_table(latency_path);
  std::vector<std::string> devices;
  if (device == "all") {
    devices = table.devices();
  } else {
    devices = split_list(device);
  }
  std::vector<OpLatencyTable> tables;
  for (const auto& d : devices) {
    if (!table.has_device(d)) throw ValidationError("device '" + d + "' not in table");
    LutFit fit = fit_lut(table.records(d), d);
    std::fprintf(stdout, "%s: rmse_ms=%s records=%d", d.c_str(),
                 csv::format_number(fit.rmse_ms).c_str(), fit.n_records);
    for (int k = 0; k < kNumOps; ++k) {
      if (fit.clamped[k]) {
        std::fprintf(stdout, " clamped=%s",
                     std::string(op_name(static_cast<Operation>(k))).c_str());
      }
    }
    std::fprintf(stdout, "\n");
    tables.push_back(fit.table);
  }
  save_lut_csv(out, tables);
  RunManifest m;
  m.command = "fit-lut";
  m.config_json =
      json{{"latency", latency_path}, {"device", device}, {"out", out.string()}}.dump();
  m.add_input(latency_path);
  m.outputs.push_back(out.string());
  write_manifest(m, sidecar_manifest(out));
}

void cmd_neighborhoods(const std::string& latency_path, const std::string& devices_arg,
                       const std::string& refs_arg, const NeighborhoodFlags& nf,
                       const std::string& restrict_device, std::uint64_t seed,
                       const fs::path& out) {
  LatencyTable table = load_latency_table(latency_path);
  std::vector<std::string> devices =
      devices_arg == "all" ? table.devices() : split_list(devices_arg);
  if (devices.empty()) throw ValidationError("--devices is empty");
  for (const auto& d : devices) {
    if (!table.has_device(d)) throw ValidationError("device '" + d + "' not in table");
  }
  std::vector<int> refs;
  if (refs_arg.find(',') != std::string::npos) {
    refs = parse_int_list(refs_arg);
  } else {
    std::vector<int> k = parse_int_list(refs_arg);
    if (k.size() != 1) throw ParseError("--refs must be k or a comma list");
    std::vector<int> allowed;
    if (!restrict_device.empty()) allowed = table.archs(restrict_device);
    refs = select_reference_archs(table, devices, k[0], seed, allowed);
  }
  NeighborhoodOptions opts = nf.options();
  std::vector<Neighborhood> nbhds;
  for (int r : refs) {
    nbhds.push_back(discover_neighborhood(table, devices, r, opts));
    std::fprintf(stdout, "reference %d: size=%zu delta=%s\n", r,
                 nbhds.back().members.size(),
                 csv::format_number(nbhds.back().delta).c_str());
  }
  csv::write_text(out, neighborhoods_csv(nbhds));
  RunManifest m;
  m.command = "neighborhoods";
  json cfg{{"latency", latency_path}, {"devices", devices_arg}, {"refs", refs_arg},
           {"restrict_to", restrict_device}, {"out", out.string()}};
  cfg["neighborhood"] = nf.snapshot();
  m.config_json = cfg.dump();
  m.add_input(latency_path);
  m.seed = seed;
  m.outputs.push_back(out.string());
  write_manifest(m, sidecar_manifest(out));
}

void cmd_virtual(const std::string& nbhd_path, const std::string& lut_path,
                 const std::string& measured_path, std::string device,
                 const fs::path& out) {
  std::vector<Neighborhood> nbhds = load_neighborhoods(nbhd_path);
  std::vector<OpLatencyTable> luts = load_lut_csv(lut_path);
  LatencyTable measured = load_latency_table(measured_path);
  if (device.empty()) {
    if (measured.devices().size() != 1) {
      throw ValidationError("--measured covers " +
                            std::to_string(measured.devices().size()) +
                            " devices; pass --device");
    }
    device = measured.devices().front();
  }
  const OpLatencyTable& lut = find_lut(luts, device);
  std::vector<VirtualExample> all;
  int dropped = 0;
  for (auto& n : nbhds) {
    auto l_r = measured.latency(device, n.reference);
    if (!l_r) {
      throw ValidationError("reference " + std::to_string(n.reference) +
                            " has no measured latency on '" + device + "'");
    }
    VirtualSynthesis syn = synthesize_virtual_examples(n, lut, *l_r);
    dropped += syn.dropped;
    all.insert(all.end(), syn.examples.begin(), syn.examples.end());
  }
  std::fprintf(stdout, "examples=%zu dropped=%d\n", all.size(), dropped);
  csv::write_text(out, virtual_csv(all));
  RunManifest m;
  m.command = "virtual";
  m.config_json = json{{"neighborhoods", nbhd_path}, {"lut", lut_path},
                       {"measured", measured_path}, {"device", device},
                       {"out", out.string()}}
                      .dump();
  m.add_input(nbhd_path);
  m.add_input(lut_path);
  m.add_input(measured_path);
  m.outputs.push_back(out.string());
  write_manifest(m, sidecar_manifest(out));
}

void cmd_train(const std::vector<std::string>& train_paths,
               const std::string& virtual_path, const std::string& adapt_path,
               const std::string& specs_path, const std::string& counters_path,
               const std::string& target, const std::string& weight_mode,
               const TrainFlags& tf, std::uint64_t seed, const fs::path& model_out) {
  std::vector<DeviceSpec> specs =
      specs_path.empty() ? std::vector<DeviceSpec>{} : load_device_specs(specs_path);
  std::vector<DeviceCounters> counters = load_counters(counters_path);
  WeightConfig wc = tf.weight_config(weight_mode_from_name(weight_mode));
  if (wc.mode == WeightMode::kHardware && specs.empty()) {
    throw ValidationError("--weight-mode hardware requires --specs");
  }

  std::vector<TrainingSample> pool;
  for (const auto& path : train_paths) {
    LatencyTable t = load_latency_table(path);
    for (const auto& d : t.devices()) {
      if (d == target) {
        throw ValidationError(path + ": rows for target '" + target +
                              "' belong in --adapt or --virtual");
      }
      for (const auto& r : t.records(d)) {
        pool.push_back({d, r.arch_index, r.latency_ms, SampleOrigin::kPool});
      }
    }
  }
  std::vector<TrainingSample> target_samples;
  std::set<int> measured_archs;
  if (!adapt_path.empty()) {
    LatencyTable a = load_latency_table(adapt_path);
    for (const auto& d : a.devices()) {
      if (d != target) {
        throw ValidationError(adapt_path + ": device '" + d + "' is not the target");
      }
      for (const auto& r : a.records(d)) {
        target_samples.push_back({target, r.arch_index, r.latency_ms,
                                  SampleOrigin::kMeasured});
        measured_archs.insert(r.arch_index);
      }
    }
  }
  if (!virtual_path.empty()) {
    for (const auto& v : load_virtual(virtual_path)) {
      if (measured_archs.contains(v.arch_index)) continue;
      target_samples.push_back({target, v.arch_index, v.label_ms,
                                v.is_measured ? SampleOrigin::kMeasured
                                              : SampleOrigin::kVirtual});
      if (v.is_measured) measured_archs.insert(v.arch_index);
    }
  }
  auto weighted = assign_sample_weights(pool, target_samples, specs, target, wc);
  std::vector<RegressionSample> samples;
  for (const auto& ws : weighted) {
    FeatureVector x = make_features(arch_from_index(ws.sample.arch_index),
                                    find_counters(counters, ws.sample.device));
    samples.push_back({std::vector<double>(x.begin(), x.end()), ws.sample.latency_ms,
                       ws.weight});
  }
  ModelParams model = train(samples, tf.train_config(seed));
  save_model(model, model_out);
  std::fprintf(stdout, "samples=%zu final_loss=%s\n", samples.size(),
               csv::format_number(model.final_loss).c_str());

  RunManifest m;
  m.command = "train";
  json cfg{{"train", train_paths},     {"virtual", virtual_path},
           {"adapt", adapt_path},      {"specs", specs_path},
           {"counters", counters_path}, {"target", target},
           {"weight_mode", weight_mode}, {"model_out", model_out.string()}};
  cfg["regressor"] = tf.snapshot();
  m.config_json = cfg.dump();
  for (const auto& p : train_paths) m.add_input(p);
  for (const auto& p : {virtual_path, adapt_path, specs_path, counters_path}) {
    if (!p.empty()) m.add_input(p);
  }
  m.seed = seed;
  m.outputs.push_back(model_out.string());
  write_manifest(m, sidecar_manifest(model_out));
}

void cmd_predict(const std::string& model_path, const std::string& archs_arg,
                 const std::string& counters_path, const std::string& device,
                 const fs::path& out) {
  ModelParams model = load_model(model_path);
  std::vector<DeviceCounters> counters = load_counters(counters_path);
  const DeviceCounters& c = find_counters(counters, device);
  std::vector<int> archs;
  bool from_file = fs::is_regular_file(archs_arg);
  if (from_file) {
    csv::Table t = csv::read_file(archs_arg);
    auto col = std::find(t.header.begin(), t.header.end(), "arch_index");
    if (col == t.header.end()) {
      throw ParseError(archs_arg + ": needs an arch_index column");
    }
    std::set<int> seen;
    for (const auto& row : t.rows) {
      int a = static_cast<int>(
          csv::parse_int(row.fields[col - t.header.begin()], row, archs_arg));
      if (seen.insert(a).second) archs.push_back(a);
    }
  } else if (archs_arg == "all") {
    for (int a = 0; a < kNumArchs; ++a) archs.push_back(a);
  } else {
    archs = parse_int_list(archs_arg);
  }
  LatencyTable preds;
  for (int a : archs) {
    FeatureVector x = make_features(arch_from_index(a), c);
    preds.add(device, a, forward(model, x));
  }
  csv::write_text(out, latency_csv(preds));
  RunManifest m;
  m.command = "predict";
  m.config_json = json{{"model", model_path}, {"archs", archs_arg},
                       {"counters", counters_path}, {"device", device},
                       {"out", out.string()}}
                      .dump();
  m.add_input(model_path);
  m.add_input(counters_path);
  if (from_file) m.add_input(archs_arg);
  m.outputs.push_back(out.string());
  write_manifest(m, sidecar_manifest(out));
}

void cmd_evaluate(const std::string& pred_path, const std::string& truth_path,
                  double bound, const std::string& out) {
  LatencyTable pred = load_latency_table(pred_path);
  LatencyTable truth = load_latency_table(truth_path);
  std::vector<double> p, t;
  for (const auto& d : pred.devices()) {
    for (const auto& r : pred.records(d)) {
      auto tv = truth.latency(d, r.arch_index);
      if (!tv) {
        throw ValidationError("no truth for (" + d + ", " +
                              std::to_string(r.arch_index) + ")");
      }
      p.push_back(r.latency_ms);
      t.push_back(*tv);
    }
  }
  double acc = error_bound_accuracy(p, t, bound);
  double mare = mean_abs_rel_error(p, t);
  std::fprintf(stdout, "n=%zu\naccuracy=%s\nmare=%s\n", p.size(),
               metric_text(acc).c_str(), metric_text(mare).c_str());
  if (!out.empty()) {
    csv::Writer w({"n", "bound", "accuracy", "mare"});
    w.field(p.size()).field(bound).field(acc).field(mare);
    w.end_row();
    w.save(out);
    RunManifest m;
    m.command = "evaluate";
    m.config_json =
        json{{"pred", pred_path}, {"truth", truth_path}, {"bound", bound}, {"out", out}}
            .dump();
    m.add_input(pred_path);
    m.add_input(truth_path);
    m.outputs.push_back(out);
    write_manifest(m, sidecar_manifest(out));
  }
}

struct LodoFlags {
  std::string data;
  std::string methods = "maple_x,maple_x1,maple_baseline,lut_only";
  int k_adapt = 3;
  int n_train = 900;
  std::string target_lut = "provided";
  bool gate = false;
  double gate_threshold = 0.5;
  int jobs = 1;
  std::string targets;
};

void cmd_lodo(const LodoFlags& lf, const NeighborhoodFlags& nf, const TrainFlags& tf,
              std::uint64_t seed, const fs::path& out) {
  fs::path dir(lf.data);
  SynthBundle data = load_bundle(dir);
  std::vector<MethodConfig> methods = parse_methods(lf.methods);
  LodoConfig cfg;
  cfg.n_train_archs = lf.n_train;
  cfg.k_adapt = lf.k_adapt;
  cfg.seed = seed;
  cfg.neighborhood = nf.options();
  cfg.gate = {lf.gate, lf.gate_threshold};
  cfg.target_lut = target_lut_source_from_name(lf.target_lut);
  cfg.weights = tf.weight_config(WeightMode::kHardware);
  cfg.train = tf.train_config(seed);
  cfg.jobs = lf.jobs;
  cfg.targets = split_list(lf.targets);
  LodoReport report = lodo_run(data, methods, cfg);

  fs::create_directories(out);
  csv::write_text(out / "lodo_report.csv", lodo_report_csv(report));
  csv::write_text(out / "splits.csv", splits_csv(report));
  csv::write_text(out / "nbhd_report.csv", neighborhood_report_csv(report));
  csv::write_text(out / "weights_report.csv", weights_report_csv(report.weights));
  for (const auto& r : report.rows) {
    std::fprintf(stdout, "%-16s %-15s n_eval=%zu acc10=%.4f mare=%.4f\n",
                 r.target_device.c_str(), r.method.c_str(), r.n_eval, r.acc10, r.mare);
  }

  RunManifest m;
  m.command = "lodo";
  json c{{"data", lf.data},          {"methods", lf.methods},
         {"k_adapt", lf.k_adapt},    {"n_train", lf.n_train},
         {"target_lut", lf.target_lut}, {"gate", lf.gate},
         {"gate_threshold", lf.gate_threshold}, {"targets", lf.targets},
         {"out", out.string()}};
  c["neighborhood"] = nf.snapshot();
  c["regressor"] = tf.snapshot();
  m.config_json = c.dump();
  for (const char* f : {"devices.csv", "counters.csv", "lut.csv", "latency.csv"}) {
    if (fs::exists(dir / f)) m.add_input(dir / f);
  }
  m.seed = seed;
  for (const char* f : {"lodo_report.csv", "splits.csv", "nbhd_report.csv",
                        "weights_report.csv"}) {
    m.outputs.push_back((out / f).string());
  }
  write_manifest(m, out / "manifest.json");
}

void cmd_correlations(const std::string& latency_path, const std::string& lut_path,
                      int refs, const NeighborhoodFlags& nf, std::uint64_t seed,
                      const fs::path& out) {
  LatencyTable table = load_latency_table(latency_path);
  std::vector<OpLatencyTable> luts =
      lut_path.empty() ? std::vector<OpLatencyTable>{} : load_lut_csv(lut_path);
  fs::create_directories(out);
  csv::write_text(out / "spearman_matrix.csv",
                  spearman_matrix_csv(spearman_matrix(table)));
  std::vector<std::string> outputs{(out / "spearman_matrix.csv").string()};

  if (!luts.empty()) {
    csv::Writer w({"device", "n", "pearson_r"});
    for (const auto& lut : luts) {
      if (!table.has_device(lut.device)) continue;
      std::vector<double> x, y;
      for (const auto& r : table.records(lut.device)) {
        x.push_back(lut_latency(lut, r.arch_index));
        y.push_back(r.latency_ms);
      }
      auto r = x.size() >= 2 ? pearson(x, y) : std::nullopt;
      w.field(lut.device).field(x.size());
      if (r) {
        w.field(*r);
      } else {
        w.field(std::string_view("nan"));
      }
      w.end_row();
    }
    w.save(out / "pearson_lut.csv");
    outputs.push_back((out / "pearson_lut.csv").string());

    const auto& devices = table.devices();
    int k = std::min<int>(refs, static_cast<int>(table.common_archs(devices).size()));
    std::vector<Neighborhood> nbhds;
    if (k > 0) {
      for (int r : select_reference_archs(table, devices, k, seed)) {
        nbhds.push_back(discover_neighborhood(table, devices, r, nf.options()));
      }
    }
    auto rows = neighborhood_correlation_density(nbhds, luts, table);
    csv::write_text(out / "nbhd_density.csv", density_csv(rows));
    outputs.push_back((out / "nbhd_density.csv").string());
  }

  RunManifest m;
  m.command = "correlations";
  json c{{"latency", latency_path}, {"lut", lut_path}, {"refs", refs},
         {"out", out.string()}};
  c["neighborhood"] = nf.snapshot();
  m.config_json = c.dump();
  m.add_input(latency_path);
  if (!lut_path.empty()) m.add_input(lut_path);
  m.seed = seed;
  m.outputs = outputs;
  write_manifest(m, out / "manifest.json");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Few-shot DNN latency prediction on cell-based search spaces"};
  app.set_version_flag("--version", std::string(fewlat::kToolVersion));
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  auto require_seed = [&seed](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "RNG seed")->required();
  };

  // synth
  std::string synth_config;
  std::string out;
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic benchmark");
  synth->add_option("--config", synth_config, "Synthetic config JSON")
      ->required()->check(CLI::ExistingFile);
  synth->add_option("--out", out, "Output directory")->required();

  // fit-lut
  std::string latency_path, device;
  auto* fit = app.add_subcommand("fit-lut", "Fit per-op LUT costs from latencies");
  fit->add_option("--latency", latency_path, "latency.csv")->required();
  fit->add_option("--device", device, "Device name, comma list or 'all'")->required();
  fit->add_option("--out", out, "Output lut.csv")->required();

  // neighborhoods
  std::string devices_arg = "all", refs_arg, restrict_device;
  NeighborhoodFlags nf;
  auto* nbhd = app.add_subcommand("neighborhoods", "Discover latency neighborhoods");
  nbhd->add_option("--latency", latency_path, "latency.csv of the training pool")
      ->required();
  nbhd->add_option("--devices", devices_arg, "Training devices (comma list or 'all')")
      ->capture_default_str();
  nbhd->add_option("--refs", refs_arg,
                   "Number of stratified references k, or a comma list of "
                   "arch indices (a single index needs a trailing comma)")
      ->required();
  nbhd->add_option("--restrict-to", restrict_device,
                   "Only pick references measured on this device");
  nf.attach(nbhd);
  require_seed(nbhd);
  nbhd->add_option("--out", out, "Output neighborhoods.csv")->required();

  // virtual
  std::string nbhd_path, lut_path, measured_path;
  auto* virt = app.add_subcommand("virtual", "Synthesize virtual latency labels");
  virt->add_option("--neighborhoods", nbhd_path, "neighborhoods.csv")->required();
  virt->add_option("--lut", lut_path, "lut.csv")->required();
  virt->add_option("--measured", measured_path, "Target measurements (latency schema)")
      ->required();
  virt->add_option("--device", device, "Target device (default: the one in --measured)");
  virt->add_option("--out", out, "Output virtual.csv")->required();

  // train
  std::vector<std::string> train_paths;
  std::string virtual_path, adapt_path, specs_path, counters_path, target;
  std::string weight_mode = "hardware", model_out;
  TrainFlags tf;
  auto* trn = app.add_subcommand("train", "Train the latency regressor");
  trn->add_option("--train", train_paths, "Training-pool latency CSVs")
      ->required()->expected(1, -1);
  trn->add_option("--virtual", virtual_path, "virtual.csv for the target");
  trn->add_option("--adapt", adapt_path, "Measured target samples (latency schema)");
  trn->add_option("--specs", specs_path, "devices.csv");
  trn->add_option("--counters", counters_path, "counters.csv")->required();
  trn->add_option("--target", target, "Target device name")->required();
  trn->add_option("--weight-mode", weight_mode,
                  "uniform|hardware|adaptation_emphasis")
      ->capture_default_str();
  tf.attach(trn);
  require_seed(trn);
  trn->add_option("--model-out", model_out, "Output model.json")->required();

  // predict
  std::string model_path, archs_arg;
  auto* pred = app.add_subcommand("predict", "Predict latencies with a trained model");
  pred->add_option("--model", model_path, "model.json")->required();
  pred->add_option("--archs", archs_arg,
                   "CSV with arch_index column, index list/ranges, or 'all'")
      ->required();
  pred->add_option("--counters", counters_path, "counters.csv")->required();
  pred->add_option("--device", device, "Device whose counters to use")->required();
  pred->add_option("--out", out, "Output CSV (latency schema)")->required();

  // evaluate
  std::string pred_path, truth_path, eval_out;
  double bound = 0.10;
  auto* eval = app.add_subcommand("evaluate", "Error-bound accuracy of predictions");
  eval->add_option("--pred", pred_path, "Predictions (latency schema)")->required();
  eval->add_option("--truth", truth_path, "Ground truth (latency schema)")->required();
  eval->add_option("--bound", bound, "Relative error bound")->capture_default_str();
  eval->add_option("--out", eval_out, "Optional metrics CSV");

  // lodo
  LodoFlags lf;
  NeighborhoodFlags lodo_nf;
  TrainFlags lodo_tf;
  auto* lodo = app.add_subcommand("lodo", "Leave-one-device-out experiment");
  lodo->add_option("--data", lf.data,
                   "Directory with devices.csv, counters.csv, latency.csv[, lut.csv]")
      ->required()->check(CLI::ExistingDirectory);
  lodo->add_option("--methods", lf.methods, "Comma list of methods")
      ->capture_default_str();
  lodo->add_option("--k-adapt", lf.k_adapt, "Adaptation samples per target")
      ->capture_default_str();
  lodo->add_option("--n-train", lf.n_train, "Architectures per training device")
      ->capture_default_str();
  lodo->add_option("--target-lut", lf.target_lut, "provided|nearest")
      ->capture_default_str();
  lodo->add_flag("--gate", lf.gate, "Skip neighborhoods with weak LUT correlation");
  lodo->add_option("--gate-threshold", lf.gate_threshold, "Correlation gate threshold")
      ->capture_default_str();
  lodo->add_option("--jobs", lf.jobs, "Folds run concurrently")->capture_default_str();
  lodo->add_option("--targets", lf.targets, "Restrict to these target devices");
  lodo_nf.attach(lodo);
  lodo_tf.attach(lodo);
  require_seed(lodo);
  lodo->add_option("--out", out, "Output directory")->required();

  // correlations
  int density_refs = 100;
  NeighborhoodFlags corr_nf;
  auto* corr = app.add_subcommand("correlations",
                                  "Spearman matrix, LUT Pearson and neighborhood density");
  corr->add_option("--latency", latency_path, "latency.csv")->required();
  corr->add_option("--lut", lut_path, "lut.csv");
  corr->add_option("--refs", density_refs, "Neighborhoods for the density report")
      ->capture_default_str();
  corr_nf.attach(corr);
  require_seed(corr);
  corr->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) {
      cmd_synth(synth_config, out);
    } else if (*fit) {
      cmd_fit_lut(latency_path, device, out);
    } else if (*nbhd) {
      cmd_neighborhoods(latency_path, devices_arg, refs_arg, nf, restrict_device,
                        seed, out);
    } else if (*virt) {
      cmd_virtual(nbhd_path, lut_path, measured_path, device, out);
    } else if (*trn) {
      cmd_train(train_paths, virtual_path, adapt_path, specs_path, counters_path,
                target, weight_mode, tf, seed, model_out);
    } else if (*pred) {
      cmd_predict(model_path, archs_arg, counters_path, device, out);
    } else if (*eval) {
      cmd_evaluate(pred_path, truth_path, bound, eval_out);
    } else if (*lodo) {
      cmd_lodo(lf, lodo_nf, lodo_tf, seed, out);
    } else if (*corr) {
      cmd_correlations(latency_path, lut_path, density_refs, corr_nf, seed, out);
    }
  } catch (const fewlat::Error& e) {
    std::fprintf(stderr, "error[%s]: %s\n", e.code().c_str(), e.what());
    return e.kind() == fewlat::ErrorKind::kNumerical ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error[INTERNAL]: %s\n", e.what());
    return 1;
  }
  return 0;
}
