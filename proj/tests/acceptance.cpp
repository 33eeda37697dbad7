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


// Acceptance runner. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "fewlat/csv.hpp"
#include "fewlat/lodo.hpp"
#include "fewlat/metrics.hpp"
#include "oracles.hpp"

using namespace fewlat;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

struct Line {
  int id;
  std::string name;
  double limit_s;  // <= 0: no runtime limit
  bool ok;
  double seconds;
  std::string detail;
};

std::vector<Line> g_lines;

Outcome timed(int id, const std::string& name, double limit_s,
              const std::function<Outcome()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool ok = o.ok && (limit_s <= 0 || s < limit_s);
  if (o.ok && !ok) o.detail += " (over time limit)";
  g_lines.push_back({id, name, limit_s, ok, s, o.detail});
  std::printf("[%s] criterion %d: %s | %.2f s%s | %s\n", ok ? "PASS" : "FAIL", id,
              name.c_str(), s,
              limit_s > 0 ? (" < " + csv::format_number(limit_s) + " s").c_str() : "",
              o.detail.c_str());
  std::fflush(stdout);
  return {ok, o.detail};
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

SynthBundle standard_bundle(std::uint64_t seed) {
  SynthConfig cfg;  // 6 devices, 500 archs, sigma 0.05, rho in [0.1, 0.4]
  cfg.seed = seed;
  return synth_generate(cfg);
}

std::vector<std::string> others(const LatencyTable& t, const std::string& target) {
  std::vector<std::string> out;
  for (const auto& d : t.devices()) {
    if (d != target) out.push_back(d);
  }
  return out;
}

// --- 1 -----------------------------------------------------------------------

Outcome virtual_label_algebra() {
  SynthBundle b = standard_bundle(101);
  const std::string target = b.specs[0].name;
  std::vector<std::string> train = others(b.latency, target);
  std::vector<int> archs = b.latency.archs(target);
  std::mt19937_64 rng(1);
  NeighborhoodOptions opts;
  double worst_pair = 0, worst_offset = 0;
  int checked = 0, pairs = 0;
  std::size_t members = 0;
  for (int i = 0; i < 200; ++i) {
    int ref = archs[rng() % archs.size()];
    Neighborhood n = discover_neighborhood(b.latency, train, ref, opts);
    const double l_r = *b.latency.latency(target, ref);
    VirtualSynthesis v = synthesize_virtual_examples(n, b.luts[0], l_r);
    if (v.dropped != 0) return {false, "labels dropped for reference " + std::to_string(ref)};
    members += n.members.size();
    double sum = 0;
    for (const auto& e : v.examples) {
      sum += e.is_measured ? lut_latency(b.luts[0], e.arch_index) - v.mean_lut_ms + l_r
                           : e.label_ms;
    }
    worst_offset = std::max(worst_offset, oracle::rel_diff(sum / v.examples.size(), l_r));
    for (const auto& x : v.examples) {
      for (const auto& y : v.examples) {
        if (x.is_measured || y.is_measured || x.arch_index == y.arch_index) continue;
        double got = x.label_ms - y.label_ms;
        double want = lut_latency(b.luts[0], x.arch_index) - lut_latency(b.luts[0], y.arch_index);
        worst_pair = std::max(worst_pair,
                              std::fabs(got - want) / std::max(x.label_ms, y.label_ms));
        ++pairs;
      }
    }
    ++checked;
  }
  bool ok = worst_pair <= 1e-9 && worst_offset <= 1e-9 && pairs > 0;
  return {ok, std::to_string(checked) + " neighborhoods, mean size " +
                  fmt("%.2f", static_cast<double>(members) / checked) + ", " +
                  std::to_string(pairs) + " pairs, max pair err " + fmt("%.2e", worst_pair) +
                  ", max offset err " + fmt("%.2e", worst_offset)};
}

// --- 2 -----------------------------------------------------------------------

Outcome weight_formula() {
  WeightConfig cfg;
  double worst = 0, prev = INFINITY;
  bool monotone = true;
  int n = 0;
  for (int k = 0; k <= 100; ++k) {
    double d = std::pow(10.0, -6.0 + k / 10.0);
    double w = importance_weight(d, cfg);
    worst = std::max(worst, std::fabs(w - std::pow(d, -0.5)));
    if (w > prev) monotone = false;
    prev = w;
    ++n;
  }
  double at_zero = importance_weight(0.0, cfg);
  double want_zero = 1.0 / std::sqrt(cfg.epsilon_floor);
  bool ok = worst <= 1e-12 && monotone && std::fabs(at_zero - want_zero) <= 1e-12;
  return {ok, std::to_string(n) + " grid points, max err " + fmt("%.2e", worst) +
                  ", monotone " + (monotone ? "yes" : "no") + ", w(0) = " +
                  csv::format_number(at_zero)};
}

// --- 3 -----------------------------------------------------------------------

Outcome correlation_oracles() {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> len(2, 8), small(0, 5);
  std::normal_distribution<double> g(0, 1);
  double worst = 0;
  int defined = 0;
  for (int t = 0; t < 1000; ++t) {
    int n = len(rng);
    std::vector<double> x, y;
    for (int i = 0; i < n; ++i) {
      x.push_back(t % 3 == 0 ? small(rng) : g(rng));
      y.push_back(t % 3 == 0 ? small(rng) : g(rng));
    }
    auto p = pearson(x, y), po = oracle::pearson(x, y);
    auto s = spearman(x, y), so = oracle::spearman(x, y);
    if (p.has_value() != po.has_value() || s.has_value() != so.has_value()) {
      return {false, "definedness mismatch at series " + std::to_string(t)};
    }
    if (p) worst = std::max(worst, std::fabs(*p - *po));
    if (s) worst = std::max(worst, std::fabs(*s - *so));
    defined += p.has_value() + s.has_value();
  }
  double hand = *spearman(std::vector<double>{1, 2, 3, 4, 5},
                          std::vector<double>{1, 3, 2, 5, 4});
  bool ok = worst <= 1e-12 && std::fabs(hand - 0.8) <= 1e-12;
  return {ok, "1000 series, " + std::to_string(defined) + " defined values, max err " +
                  fmt("%.2e", worst) + ", hand case " + csv::format_number(hand)};
}

// --- 4 -----------------------------------------------------------------------

Outcome neighborhood_oracle() {
  std::mt19937_64 rng(4);
  int mismatches = 0, monotone_fail = 0;
  std::size_t total = 0;
  for (int i = 0; i < 100; ++i) {
    SynthConfig cfg;
    cfg.n_devices = 5;
    cfg.n_archs = 100 + static_cast<int>(rng() % 901);
    cfg.seed = 1000 + i;
    SynthBundle b = synth_generate(cfg);
    const auto& devs = b.latency.devices();
    std::vector<int> archs = b.latency.archs(devs[0]);
    int ref = archs[rng() % archs.size()];
    double delta = std::uniform_real_distribution<double>(0.0, 0.15)(rng);
    auto n = discover_neighborhood(b.latency, devs, ref, delta, 10);
    if (n.members != oracle::neighborhood(b.latency, devs, ref, delta, 10)) ++mismatches;
    total += n.members.size();
    std::vector<int> prev;
    for (double d : {0.0, delta / 4, delta / 2, delta, 2 * delta}) {
      auto m = discover_neighborhood(b.latency, devs, ref, d, kNumArchs).members;
      if (!std::includes(m.begin(), m.end(), prev.begin(), prev.end())) ++monotone_fail;
      prev = m;
    }
  }
  return {mismatches == 0 && monotone_fail == 0,
          "100 instances, " + std::to_string(mismatches) + " oracle mismatches, " +
              std::to_string(monotone_fail) + " monotonicity failures, mean size " +
              fmt("%.2f", total / 100.0)};
}

// --- 5 -----------------------------------------------------------------------

Outcome lut_recovery(std::string& csv_out) {
  SynthConfig cfg;
  cfg.noise_sigma = 0.0;
  cfg.parallelism_range = {0.0, 0.0};
  cfg.seed = 5;
  SynthBundle b = synth_generate(cfg);
  double worst = 0;
  std::vector<OpLatencyTable> fitted;
  for (std::size_t d = 0; d < b.specs.size(); ++d) {
    LutFit fit = fit_lut(b.latency.records(b.specs[d].name), b.specs[d].name);
    for (int k = 0; k < kNumOps; ++k) {
      worst = std::max(worst, oracle::rel_diff(fit.table.cost_ms[k], b.luts[d].cost_ms[k]));
    }
    fitted.push_back(fit.table);
  }
  LodoConfig lc;
  lc.n_train_archs = 450;
  lc.seed = 5;
  LodoReport r = lodo_run(b, parse_methods("lut_only"), lc);
  double min_acc = 1.0;
  for (const auto& row : r.rows) min_acc = std::min(min_acc, row.acc10);
  csv_out = lut_csv(fitted) + lodo_report_csv(r);
  return {worst <= 1e-9 && min_acc == 1.0 && r.rows.size() == 6,
          "max cost rel err " + fmt("%.2e", worst) + ", lut_only min acc10 over " +
              std::to_string(r.rows.size()) + " folds " + csv::format_number(min_acc)};
}

// --- 6 -----------------------------------------------------------------------

Outcome gradient_correctness() {
  SynthBundle b = standard_bundle(6);
  std::vector<RegressionSample> pool;
  for (const auto& d : b.latency.devices()) {
    for (const auto& r : b.latency.records(d)) {
      FeatureVector x = make_features(arch_from_index(r.arch_index), find_counters(b.counters, d));
      pool.push_back({std::vector<double>(x.begin(), x.end()), r.latency_ms, 1.0});
    }
  }
  FeatureStats st = compute_feature_stats(pool);
  std::mt19937_64 rng(6);
  double worst = 0;
  int checked = 0, kinks = 0;
  for (int i = 0; i < 20; ++i) {
    ModelParams p = init_model({kFeatureDim, 128, 128, 1}, 600 + i);
    p.input_mean = st.mean;
    p.input_std = st.std;
    for (auto& layer : p.layers) {
      for (Eigen::Index j = 0; j < layer.bias.size(); ++j) {
        layer.bias[j] = std::normal_distribution<double>(0, 0.1)(rng);
      }
    }
    RegressionSample s = pool[rng() % pool.size()];
    s.weight = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
    GradientCheckResult r = gradient_check(p, std::span(&s, 1), 1e-5, i);
    worst = std::max(worst, r.max_rel_error);
    checked += r.checked;
    kinks += r.skipped_kinks;
  }
  return {worst <= 1e-4 && checked > 0,
          "20 pairs, " + std::to_string(checked) + " parameters checked, " +
              std::to_string(kinks) + " kink skips, max rel err " + fmt("%.2e", worst)};
}

// --- 7 and 8 -----------------------------------------------------------------

LodoConfig directional_config(std::uint64_t seed) {
  LodoConfig cfg;
  cfg.n_train_archs = 450;
  cfg.k_adapt = 3;
  cfg.seed = seed;
  cfg.train.hidden = {128, 128};
  cfg.train.learning_rate = 0.01;
  cfg.train.momentum = 0.9;
  cfg.train.epochs = 100;
  cfg.train.batch_size = 64;
  return cfg;
}

struct DirectionalRun {
  std::map<std::string, double> mean_acc;
  int seeds_in_regime = 0;
  std::string csv;
  std::string per_seed;
};

DirectionalRun directional_runs() {
  DirectionalRun out;
  auto methods = parse_methods("maple_x,maple_x1,maple_baseline");
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SynthBundle b = standard_bundle(seed);
    LodoReport r = lodo_run(b, methods, directional_config(seed));
    std::map<std::string, double> acc;
    for (const auto& row : r.rows) acc[row.method] += row.acc10 / 6.0;
    for (const auto& [m, a] : acc) out.mean_acc[m] += a / 5.0;
    bool regime = r.neighborhoods.size() == 18;
    for (const auto& n : r.neighborhoods) {
      std::size_t s = n.neighborhood.members.size();
      regime = regime && s >= 5 && s <= 10;
    }
    out.seeds_in_regime += regime;
    out.csv += lodo_report_csv(r) + neighborhood_report_csv(r) + splits_csv(r);
    out.per_seed += " s" + std::to_string(seed) + "=" + fmt("%.3f", acc["maple_x"]) + "/" +
                    fmt("%.3f", acc["maple_x1"]) + "/" + fmt("%.3f", acc["maple_baseline"]);
  }
  return out;
}

// --- 10 ----------------------------------------------------------------------

int run_cli(const std::string& args, const fs::path& log) {
  std::string cmd = std::string("\"") + FEWLAT_CLI_PATH + "\" " + args + " >\"" +
                    log.string() + "\" 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome protocol_fidelity(const fs::path& data, const fs::path& work, bool have_lut) {
  fs::path out = work / "lodo";
  std::string args = "lodo --data \"" + data.string() +
                     "\" --methods maple_x,maple_x1,maple_baseline --n-train 900 --k-adapt 3"
                     " --epochs 100 --lr 0.01 --momentum 0.9 --seed 1 --out \"" +
                     out.string() + "\"";
  if (!have_lut) args += " --target-lut nearest";
  int rc = run_cli(args, work / "lodo.log");
  if (rc != 0) {
    return {false, "lodo exited " + std::to_string(rc) + ": " + csv::read_text(work / "lodo.log")};
  }
  SynthBundle b = load_bundle(data);
  const std::size_t n_dev = b.latency.devices().size();
  csv::Table rows = csv::read_file(out / "lodo_report.csv");
  csv::Table splits = csv::read_file(out / "splits.csv");
  std::string problems;
  if (n_dev != 6) problems += " expected 6 devices;";
  if (rows.rows.size() != n_dev * 3) problems += " report rows != devices x 3;";
  if (splits.rows.size() != n_dev) problems += " split rows != devices;";
  std::set<std::string> row_devices;
  for (std::size_t i = 0; i < rows.rows.size(); ++i) {
    const auto& f = rows.rows[i].fields;
    const char* want[] = {"maple_x", "maple_x1", "maple_baseline"};
    if (f[1] != want[i % 3]) problems += " method order at row " + std::to_string(i) + ";";
    row_devices.insert(f[0]);
  }
  if (row_devices.size() != n_dev) problems += " not every device is a target;";
  for (const auto& s : splits.rows) {
    const auto& f = s.fields;
    std::size_t total = b.latency.size(f[0]);
    if (f[1] != "5") problems += " " + f[0] + " train devices " + f[1] + ";";
    if (f[2] != "4500") problems += " " + f[0] + " train samples " + f[2] + ";";
    if (f[3] != "3") problems += " " + f[0] + " adaptation " + f[3] + ";";
    if (f[4] != std::to_string(total - 3)) problems += " " + f[0] + " n_eval " + f[4] + ";";
    if (f[5] != "0") problems += " " + f[0] + " adapt/eval overlap " + f[5] + ";";
  }
  if (!fs::exists(out / "manifest.json")) problems += " no manifest;";
  if (!problems.empty()) return {false, problems};
  return {true, std::to_string(rows.rows.size()) + " report rows, splits 4500/3 on all " +
                    std::to_string(n_dev) + " folds, zero adapt/eval overlap"};
}

}  // namespace

int main() {
  std::string csv5, csv5b;
  DirectionalRun dir1, dir2;

  timed(1, "virtual-label algebra", 1.0, virtual_label_algebra);
  timed(2, "weight formula", 1.0, weight_formula);
  timed(3, "correlation oracles", 5.0, correlation_oracles);
  timed(4, "neighborhood oracle", 10.0, neighborhood_oracle);
  timed(5, "LUT recovery", 10.0, [&] { return lut_recovery(csv5); });
  timed(6, "gradient correctness", 30.0, gradient_correctness);

  double t7 = 0;
  timed(7, "directional end-to-end", 180.0, [&] {
    auto t0 = std::chrono::steady_clock::now();
    dir1 = directional_runs();
    t7 = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double x = dir1.mean_acc["maple_x"], x1 = dir1.mean_acc["maple_x1"],
           base = dir1.mean_acc["maple_baseline"];
    bool ok = x >= x1 - 0.02 && x1 - 0.02 >= base - 0.04 && x > base;
    return Outcome{ok, "mean acc10 maple_x " + fmt("%.4f", x) + ", maple_x1 " +
                           fmt("%.4f", x1) + ", maple_baseline " + fmt("%.4f", base) +
                           " |" + dir1.per_seed};
  });
  timed(8, "neighborhood-size regime", 0.0, [&] {
    // Runtime is counted under criterion 7.
    return Outcome{dir1.seeds_in_regime >= 4,
                   std::to_string(dir1.seeds_in_regime) +
                       " of 5 seeds with every neighborhood size in [5, 10]"};
  });

  timed(9, "determinism", 0.0, [&] {
    lut_recovery(csv5b);
    dir2 = directional_runs();
    bool same5 = csv5 == csv5b, same78 = dir1.csv == dir2.csv;
    return Outcome{same5 && same78 && !csv5.empty() && !dir1.csv.empty(),
                   std::string("criterion 5 reports ") + (same5 ? "identical" : "DIFFER") +
                       ", criteria 7-8 reports " + (same78 ? "identical" : "DIFFER") + " (" +
                       std::to_string(dir1.csv.size()) + " bytes)"};
  });

  timed(10, "protocol fidelity", 0.0, [&] {
    fs::path work = fs::temp_directory_path() / "fewlat_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);
    Outcome o;
    if (const char* real = std::getenv("FEWLAT_REAL_DATA"); real && *real) {
      fs::path data(real);
      o = protocol_fidelity(data, work, fs::exists(data / "lut.csv"));
      o.detail = "real data at " + data.string() + ": " + o.detail;
    } else {
      csv::write_text(work / "cfg.json",
                      R"({"n_devices":6,"n_archs":1000,"noise_sigma":0.05,)"
                      R"("parallelism_range":[0.1,0.4],"seed":10})");
      int rc = run_cli("synth --config \"" + (work / "cfg.json").string() + "\" --out \"" +
                           (work / "data").string() + "\"",
                       work / "synth.log");
      if (rc != 0) return Outcome{false, "synth exited " + std::to_string(rc)};
      o = protocol_fidelity(work / "data", work, true);
      o.detail = "synthetic stand-in, set FEWLAT_REAL_DATA=<dir> for measured files: " +
                 o.detail;
    }
    fs::remove_all(work);
    return o;
  });

  int failed = 0;
  for (const auto& l : g_lines) failed += !l.ok;
  std::printf("%d of %zu criteria passed\n", static_cast<int>(g_lines.size()) - failed,
              g_lines.size());
  return failed == 0 ? 0 : 1;
}
