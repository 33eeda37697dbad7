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

#include "fewlat/lut.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>

#include "fewlat/csv.hpp"
#include "fewlat/errors.hpp"

namespace fewlat {

void validate(const OpLatencyTable& table) {
  for (int k = 0; k < kNumOps; ++k) {
    double c = table.cost_ms[k];
    if (!std::isfinite(c) || c < 0.0) {
      throw ValidationError("LUT for '" + table.device + "': cost of " +
                            std::string(op_name(static_cast<Operation>(k))) +
                            " must be finite and >= 0");
    }
  }
}

double lut_latency(const OpLatencyTable& table, const CellArchitecture& arch) {
  // Summing per op kind keeps edge permutations bit-identical.
  OpCounts counts = op_counts(arch);
  double sum = 0.0;
  for (int k = 0; k < kNumOps; ++k) sum += counts[k] * table.cost_ms[k];
  return sum;
}

double lut_latency(const OpLatencyTable& table, int arch_index) {
  return lut_latency(table, arch_from_index(arch_index));
}

LutFit fit_lut(std::span<const LatencyRecord> records, std::string device) {
  if (records.empty()) {
    throw ValidationError("fit_lut: no records for device '" + device + "'");
  }
  using Mat5 = Eigen::Matrix<double, kNumOps, kNumOps>;
  using Vec5 = Eigen::Matrix<double, kNumOps, 1>;
  Mat5 gram = Mat5::Zero();
  Vec5 rhs = Vec5::Zero();
  for (const auto& r : records) {
    OpCounts counts = op_counts(arch_from_index(r.arch_index));
    Vec5 row;
    for (int k = 0; k < kNumOps; ++k) row[k] = counts[k];
    gram.noalias() += row * row.transpose();
    rhs.noalias() += row * r.latency_ms;
  }

  Eigen::FullPivLU<Mat5> lu(gram);
  if (lu.rank() < kNumOps) {
    Eigen::MatrixXd kernel = lu.kernel();
    Eigen::Index worst = 0;
    kernel.col(0).cwiseAbs().maxCoeff(&worst);
    throw NumericalError(
        "RANK_DEFICIENT",
        "fit_lut: design matrix for '" + device + "' has rank " +
            std::to_string(lu.rank()) + " < 5; cost of " +
            std::string(op_name(static_cast<Operation>(worst))) +
            " is not identifiable");
  }
  Vec5 solution = gram.ldlt().solve(rhs);

  LutFit fit;
  fit.table.device = std::move(device);
  fit.n_records = static_cast<int>(records.size());
  for (int k = 0; k < kNumOps; ++k) {
    fit.unclamped_cost_ms[k] = solution[k];
    fit.clamped[k] = solution[k] < 0.0;
    fit.table.cost_ms[k] = fit.clamped[k] ? 0.0 : solution[k];
  }
  double sq = 0.0;
  for (const auto& r : records) {
    double e = lut_latency(fit.table, r.arch_index) - r.latency_ms;
    sq += e * e;
  }
  fit.rmse_ms = std::sqrt(sq / static_cast<double>(records.size()));
  if (!std::isfinite(fit.rmse_ms)) {
    throw NumericalError("NONFINITE", "fit_lut: non-finite solution for '" +
                                          fit.table.device + "'");
  }
  return fit;
}

std::vector<OpLatencyTable> load_lut_csv(const std::filesystem::path& path) {
  const std::string src = path.string();
  csv::Table t = csv::read_file(path);
  csv::require_header(t, {"device", "op_id", "cost_ms"}, src);

  std::vector<OpLatencyTable> out;
  std::map<std::string, std::size_t> slot;
  std::vector<std::array<bool, kNumOps>> seen;
  for (const auto& row : t.rows) {
    const std::string& dev = row.fields[0];
    long long op = csv::parse_int(row.fields[1], row, src);
    double cost = csv::parse_double(row.fields[2], row, src);
    if (op < 0 || op >= kNumOps) {
      throw ValidationError(src + ":" + std::to_string(row.line) +
                            ": op_id must be in [0, 4]");
    }
    auto [it, inserted] = slot.try_emplace(dev, out.size());
    if (inserted) {
      out.push_back(OpLatencyTable{dev, {}});
      seen.push_back({});
    }
    if (seen[it->second][op]) {
      throw ValidationError(src + ":" + std::to_string(row.line) +
                            ": duplicate op_id for device '" + dev + "'");
    }
    seen[it->second][op] = true;
    out[it->second].cost_ms[op] = cost;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (int k = 0; k < kNumOps; ++k) {
      if (!seen[i][k]) {
        throw ValidationError(src + ": device '" + out[i].device +
                              "' is missing op_id " + std::to_string(k));
      }
    }
    validate(out[i]);
  }
  return out;
}

std::string lut_csv(std::span<const OpLatencyTable> tables) {
  csv::Writer w({"device", "op_id", "cost_ms"});
  for (const auto& t : tables) {
    for (int k = 0; k < kNumOps; ++k) {
      w.field(t.device).field(k).field(t.cost_ms[k]);
      w.end_row();
    }
  }
  return w.str();
}

void save_lut_csv(const std::filesystem::path& path,
                  std::span<const OpLatencyTable> tables) {
  csv::write_text(path, lut_csv(tables));
}

const OpLatencyTable& find_lut(std::span<const OpLatencyTable> tables,
                               const std::string& device) {
  for (const auto& t : tables) {
    if (t.device == device) return t;
  }
  throw ValidationError("no LUT for device '" + device + "'");
}

}  // namespace fewlat
