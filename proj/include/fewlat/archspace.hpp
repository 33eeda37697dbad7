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

// Cell search space: a 4-node DAG with 6 edges, each carrying one of 5
// operations. Architectures are identified by a base-5 index where edge e
// contributes digit e (edge 0 is least significant). Files persist only
// that index, so the edge order below is the single definition used
// everywhere.

#include <array>
#include <cstdint>
#include <string_view>

namespace fewlat {

inline constexpr int kNumOps = 5;
inline constexpr int kNumEdges = 6;
inline constexpr int kNumArchs = 15625;  // 5^6
inline constexpr int kOneHotDim = kNumOps * kNumEdges;

enum class Operation : std::uint8_t {
  kNone = 0,
  kSkipConnect = 1,
  kConv1x1 = 2,
  kConv3x3 = 3,
  kAvgPool3x3 = 4,
};

std::string_view op_name(Operation op);
// Throws DomainError on an unknown name.
Operation op_from_name(std::string_view name);
// Throws DomainError when id is outside [0, 4].
Operation op_from_id(int id);
constexpr int op_id(Operation op) { return static_cast<int>(op); }

// Edges in (target, source) lexicographic order of the 4-node DAG:
// (1,0) (2,0) (2,1) (3,0) (3,1) (3,2).
inline constexpr std::array<std::array<int, 2>, kNumEdges> kEdgeEndpoints = {
    {{1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}}};

struct CellArchitecture {
  std::array<Operation, kNumEdges> edge_ops{};

  friend bool operator==(const CellArchitecture&,
                         const CellArchitecture&) = default;
};

using OneHot = std::array<double, kOneHotDim>;
using OpCounts = std::array<int, kNumOps>;

CellArchitecture arch_from_index(int index);
int arch_to_index(const CellArchitecture& arch);

// Builds an architecture from raw op ids, validating each.
CellArchitecture arch_from_ops(const std::array<int, kNumEdges>& ops);

OneHot encode_one_hot(const CellArchitecture& arch);
OpCounts op_counts(const CellArchitecture& arch);

// Number of edges carrying an operation other than `none`.
int active_edges(const CellArchitecture& arch);

bool valid_arch_index(int index);

}  // namespace fewlat
