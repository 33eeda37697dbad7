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

#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "fewlat/errors.hpp"

namespace fewlat {
namespace {

std::array<int, kNumEdges> ids(const CellArchitecture& a) {
  std::array<int, kNumEdges> out{};
  for (int e = 0; e < kNumEdges; ++e) out[e] = op_id(a.edge_ops[e]);
  return out;
}

std::set<int> hot_positions(const OneHot& v) {
  std::set<int> out;
  for (int i = 0; i < kOneHotDim; ++i) {
    if (v[i] == 1.0) out.insert(i);
  }
  return out;
}

TEST(ArchFromIndex, Zero) {
  EXPECT_EQ(ids(arch_from_index(0)), (std::array<int, 6>{0, 0, 0, 0, 0, 0}));
}

TEST(ArchFromIndex, Max) {
  EXPECT_EQ(ids(arch_from_index(15624)), (std::array<int, 6>{4, 4, 4, 4, 4, 4}));
}

TEST(ArchFromIndex, Seven) {
  EXPECT_EQ(ids(arch_from_index(7)), (std::array<int, 6>{2, 1, 0, 0, 0, 0}));
}

TEST(ArchFromIndex, OutOfRange) {
  EXPECT_THROW(arch_from_index(-1), DomainError);
  EXPECT_THROW(arch_from_index(15625), DomainError);
  EXPECT_FALSE(valid_arch_index(15625));
  EXPECT_TRUE(valid_arch_index(0));
}

TEST(ArchFromIndex, ExhaustiveRoundTrip) {
  for (int i = 0; i < kNumArchs; ++i) {
    ASSERT_EQ(arch_to_index(arch_from_index(i)), i);
  }
}

TEST(ArchFromIndex, DigitFormula) {
  for (int i = 0; i < kNumArchs; i += 37) {
    auto d = ids(arch_from_index(i));
    int v = 0, p = 1;
    for (int e = 0; e < kNumEdges; ++e, p *= 5) v += d[e] * p;
    EXPECT_EQ(v, i);
    for (int x : d) EXPECT_TRUE(x >= 0 && x <= 4);
  }
}

TEST(OneHot, AllNone) {
  EXPECT_EQ(hot_positions(encode_one_hot(arch_from_ops({0, 0, 0, 0, 0, 0}))),
            (std::set<int>{0, 5, 10, 15, 20, 25}));
}

TEST(OneHot, Mixed) {
  EXPECT_EQ(hot_positions(encode_one_hot(arch_from_ops({2, 1, 0, 0, 0, 0}))),
            (std::set<int>{2, 6, 10, 15, 20, 25}));
}

TEST(OneHot, SumAndInjective) {
  std::set<OneHot> seen;
  for (int i = 0; i < kNumArchs; ++i) {
    OneHot v = encode_one_hot(arch_from_index(i));
    ASSERT_EQ(std::accumulate(v.begin(), v.end(), 0.0), 6.0);
    for (double x : v) ASSERT_TRUE(x == 0.0 || x == 1.0);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), static_cast<std::size_t>(kNumArchs));
}

TEST(OpCounts, Examples) {
  EXPECT_EQ(op_counts(arch_from_ops({0, 0, 0, 0, 0, 0})), (OpCounts{6, 0, 0, 0, 0}));
  EXPECT_EQ(op_counts(arch_from_ops({2, 1, 0, 0, 0, 0})), (OpCounts{4, 1, 1, 0, 0}));
  EXPECT_EQ(op_counts(arch_from_ops({4, 3, 2, 1, 0, 1})), (OpCounts{1, 2, 1, 1, 1}));
}

TEST(OpCounts, SumIsSix) {
  for (int i = 0; i < kNumArchs; ++i) {
    OpCounts c = op_counts(arch_from_index(i));
    ASSERT_EQ(std::accumulate(c.begin(), c.end(), 0), 6);
    ASSERT_EQ(active_edges(arch_from_index(i)), 6 - c[0]);
  }
}

TEST(Operation, Names) {
  for (int k = 0; k < kNumOps; ++k) {
    Operation op = op_from_id(k);
    EXPECT_EQ(op_from_name(op_name(op)), op);
  }
  EXPECT_EQ(op_from_name("nor_conv_3x3"), Operation::kConv3x3);
  EXPECT_THROW(op_from_id(5), DomainError);
  EXPECT_THROW(arch_from_ops({0, 0, 0, 0, 0, 7}), DomainError);
}

}  // namespace
}  // namespace fewlat
