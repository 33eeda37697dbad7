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

#include "fewlat/archspace.hpp"

#include <string>

#include "fewlat/errors.hpp"

namespace fewlat {

namespace {

constexpr std::array<std::string_view, kNumOps> kOpNames = {
    "none", "skip_connect", "conv_1x1", "conv_3x3", "avg_pool_3x3"};

}  // namespace

std::string_view op_name(Operation op) { return kOpNames[op_id(op)]; }

Operation op_from_name(std::string_view name) {
  for (int k = 0; k < kNumOps; ++k) {
    if (kOpNames[k] == name) return static_cast<Operation>(k);
  }
  // NAS-Bench-201 spells the 1x1/3x3 convs "nor_conv_*".
  if (name == "nor_conv_1x1") return Operation::kConv1x1;
  if (name == "nor_conv_3x3") return Operation::kConv3x3;
  throw DomainError("unknown operation name '" + std::string(name) + "'");
}

Operation op_from_id(int id) {
  if (id < 0 || id >= kNumOps) {
    throw DomainError("operation id " + std::to_string(id) +
                      " outside [0, 4]");
  }
  return static_cast<Operation>(id);
}

bool valid_arch_index(int index) { return index >= 0 && index < kNumArchs; }

CellArchitecture arch_from_index(int index) {
  if (!valid_arch_index(index)) {
    throw DomainError("architecture index " + std::to_string(index) +
                      " outside [0, 15624]");
  }
  CellArchitecture arch;
  for (int e = 0; e < kNumEdges; ++e) {
    arch.edge_ops[e] = static_cast<Operation>(index % kNumOps);
    index /= kNumOps;
  }
  return arch;
}

int arch_to_index(const CellArchitecture& arch) {
  int index = 0;
  for (int e = kNumEdges - 1; e >= 0; --e) {
    index = index * kNumOps + op_id(arch.edge_ops[e]);
  }
  return index;
}

CellArchitecture arch_from_ops(const std::array<int, kNumEdges>& ops) {
  CellArchitecture arch;
  for (int e = 0; e < kNumEdges; ++e) arch.edge_ops[e] = op_from_id(ops[e]);
  return arch;
}

OneHot encode_one_hot(const CellArchitecture& arch) {
  OneHot v{};
  for (int e = 0; e < kNumEdges; ++e) {
    v[e * kNumOps + op_id(arch.edge_ops[e])] = 1.0;
  }
  return v;
}

OpCounts op_counts(const CellArchitecture& arch) {
  OpCounts counts{};
  for (Operation op : arch.edge_ops) ++counts[op_id(op)];
  return counts;
}

int active_edges(const CellArchitecture& arch) {
  return kNumEdges - op_counts(arch)[op_id(Operation::kNone)];
}

}  // namespace fewlat
