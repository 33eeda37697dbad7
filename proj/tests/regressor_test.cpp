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


#include "fewlat/regressor.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

#include "fewlat/errors.hpp"
#include "fewlat/lut.hpp"
#include "fewlat/metrics.hpp"

namespace fewlat {
namespace {

std::vector<RegressionSample> random_samples(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> arch(0, kNumArchs - 1);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  DeviceCounters c{"d", {}};
  std::vector<RegressionSample> out;
  for (int i = 0; i < n; ++i) {
    for (double& v : c.values) v = u(rng);
    FeatureVector x = make_features(arch_from_index(arch(rng)), c);
    out.push_back({std::vector<double>(x.begin(), x.end()), u(rng) * 5, u(rng)});
  }
  return out;
}

TEST(Features, Layout) {
  DeviceCounters c{"d", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}};
  FeatureVector x = make_features(arch_from_index(7), c);
  double hot = 0;
  for (int i = 0; i < kOneHotDim; ++i) hot += x[i];
  EXPECT_EQ(hot, 6.0);
  EXPECT_EQ(x[2], 1.0);
  EXPECT_EQ(x[6], 1.0);
  EXPECT_EQ(x[30], 0.0);
  EXPECT_EQ(x[39], 9.0);
}

TEST(Forward, ZeroModelPredictsOne) {
  ModelParams p = zero_model({40, 128, 128, 1});
  auto samples = random_samples(5, 1);
  for (const auto& s : samples) EXPECT_EQ(forward(p, s.x), 1.0);
}

TEST(Forward, HandBuiltToy) {
  // 2 -> 1 -> 1, identity output: y = v * relu(w . x + b) + c.
  ModelParams p = zero_model({2, 1, 1}, TargetTransform::kIdentity);
  p.layers[0].weight << 0.5, -0.25;
  p.layers[0].bias << 0.1;
  p.layers[1].weight << 3.0;
  p.layers[1].bias << 1.0;
  std::vector<double> x = {2.0, 1.0};
  // pre = 1.0 - 0.25 + 0.1 = 0.85; y = 3 * 0.85 + 1 = 3.55.
  EXPECT_NEAR(forward(p, x), 3.55, 1e-15);
  p.layers[0].weight *= 2.0;
  // pre = 2.0 - 0.5 + 0.1 = 1.6; y = 5.8.
  EXPECT_NEAR(forward(p, x), 5.8, 1e-15);
  std::vector<double> neg = {-2.0, 1.0};
  EXPECT_EQ(forward(p, neg), 1.0);  // rectifier off
  p.target_transform = TargetTransform::kLog;
  EXPECT_NEAR(forward(p, x), std::exp(5.8), 1e-12);
}

TEST(Forward, UsesStoredStandardization) {
  ModelParams p = zero_model({1, 1}, TargetTransform::kIdentity);
  p.layers[0].weight << 1.0;
  p.input_mean << 4.0;
  p.input_std << 2.0;
  EXPECT_EQ(forward(p, std::vector<double>{10.0}), 3.0);
}

TEST(Forward, DeterministicAndDimensionChecked) {
  ModelParams p = init_model({40, 128, 128, 1}, 3);
  auto s = random_samples(1, 2)[0];
  double a = forward(p, s.x), b = forward(p, s.x);
  EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
  EXPECT_THROW(forward(p, std::vector<double>(39, 0.0)), ValidationError);
}

TEST(Loss, WeightTwoEqualsDuplicate) {
  ModelParams p = init_model({40, 16, 1}, 5);
  auto s = random_samples(6, 3);
  std::vector<RegressionSample> doubled = s, listed = s;
  doubled[2].weight *= 2;
  listed.push_back(s[2]);
  EXPECT_NEAR(weighted_loss(p, doubled), weighted_loss(p, listed), 1e-12);
}

TEST(Loss, MatchesDefinition) {
  ModelParams p = init_model({40, 8, 1}, 6);
  auto s = random_samples(9, 4);
  double num = 0, den = 0;
  for (const auto& r : s) {
    double e = forward_transformed(p, r.x) - std::log(r.label_ms);
    num += r.weight * e * e;
    den += r.weight;
  }
  EXPECT_NEAR(weighted_loss(p, s), num / den, 1e-12);
}

TEST(Gradient, FiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ModelParams p = init_model({40, 128, 128, 1}, seed);
    auto s = random_samples(8, 100 + seed);
    FeatureStats st = compute_feature_stats(s);
    p.input_mean = st.mean;
    p.input_std = st.std;
    GradientCheckResult r = gradient_check(p, s, 1e-5, seed);
    EXPECT_LT(r.max_rel_error, 1e-4);
    EXPECT_GT(r.checked, 40);
  }
}

TEST(Gradient, LinearModelClosedForm) {
  ModelParams p = init_model({6, 1}, 2, TargetTransform::kIdentity);
  p.layers[0].bias << 0.3;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0, 1);
  std::vector<RegressionSample> s;
  for (int i = 0; i < 10; ++i) {
    std::vector<double> x(6);
    for (double& v : x) v = g(rng);
    s.push_back({x, g(rng), 0.5 + i * 0.1});
  }
  ParamGradients grad;
  loss_and_gradient(p, s, grad);
  double wsum = 0;
  std::vector<double> gw(6, 0.0);
  double gb = 0;
  for (const auto& r : s) wsum += r.weight;
  for (const auto& r : s) {
    double pred = p.layers[0].bias[0];
    for (int k = 0; k < 6; ++k) pred += p.layers[0].weight(0, k) * r.x[k];
    double res = pred - r.label_ms;
    for (int k = 0; k < 6; ++k) gw[k] += 2 * r.weight * res * r.x[k] / wsum;
    gb += 2 * r.weight * res / wsum;
  }
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(grad.weight[0](0, k), gw[k], 1e-12);
  EXPECT_NEAR(grad.bias[0][0], gb, 1e-12);
}

TEST(Gradient, ZeroWeightSampleContributesNothing) {
  ModelParams p = init_model({40, 16, 1}, 8);
  auto s = random_samples(5, 9);
  std::vector<RegressionSample> with = s;
  RegressionSample extra = random_samples(1, 10)[0];
  extra.weight = 0.0;
  with.push_back(extra);
  ParamGradients a, b;
  loss_and_gradient(p, s, a);
  loss_and_gradient(p, with, b);
  for (std::size_t l = 0; l < a.weight.size(); ++l) {
    EXPECT_LT((a.weight[l] - b.weight[l]).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((a.bias[l] - b.bias[l]).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Train, Deterministic) {
  auto s = random_samples(50, 11);
  TrainConfig cfg;
  cfg.hidden = {16, 16};
  cfg.epochs = 20;
  cfg.seed = 4;
  EXPECT_EQ(model_to_json(train(s, cfg)), model_to_json(train(s, cfg)));
  TrainConfig other = cfg;
  other.seed = 5;
  EXPECT_NE(model_to_json(train(s, cfg)), model_to_json(train(s, other)));
}

TEST(Train, MemorizesSingleSample) {
  auto s = random_samples(1, 12);
  TrainConfig cfg;
  cfg.hidden = {8};
  cfg.epochs = 200;
  cfg.seed = 1;
  ModelParams p = train(s, cfg);
  EXPECT_NEAR(forward(p, s[0].x) / s[0].label_ms, 1.0, 0.01);
  EXPECT_EQ(p.unit_std_features.size(), 40u);
}

TEST(Train, LearnsNoiselessLinearFunction) {
  OpLatencyTable lut{"d", {0.5, 1.0, 2.0, 3.0, 1.5}};
  DeviceCounters c{"d", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}};
  std::vector<RegressionSample> tr, te;
  std::mt19937_64 rng(1);
  std::bernoulli_distribution held_out(0.2);
  for (int a = 0; a < kNumArchs; a += 7) {
    FeatureVector x = make_features(arch_from_index(a), c);
    RegressionSample s{std::vector<double>(x.begin(), x.end()), lut_latency(lut, a), 1.0};
    (held_out(rng) ? te : tr).push_back(std::move(s));
  }
  TrainConfig cfg;
  cfg.epochs = 300;
  cfg.learning_rate = 0.01;
  cfg.momentum = 0.9;
  cfg.seed = 3;
  ModelParams p = train(tr, cfg);
  std::vector<double> preds, truths;
  for (const auto& s : te) {
    preds.push_back(forward(p, s.x));
    truths.push_back(s.label_ms);
  }
  EXPECT_GE(error_bound_accuracy(preds, truths), 0.95);
}

TEST(Train, Errors) {
  auto s = random_samples(4, 13);
  TrainConfig cfg;
  s[1].weight = 0.0;
  EXPECT_THROW(train(s, cfg), ValidationError);
  s[1].weight = 1.0;
  s[2].label_ms = -1.0;
  EXPECT_THROW(train(s, cfg), ValidationError);
  EXPECT_THROW(train({}, cfg), ValidationError);
  cfg.epochs = 0;
  EXPECT_THROW(validate(cfg), ValidationError);
}

TEST(Train, DivergenceReported) {
  auto s = random_samples(40, 14);
  for (auto& r : s) r.label_ms *= 1e6;
  TrainConfig cfg;
  cfg.hidden = {32};
  cfg.target_transform = TargetTransform::kIdentity;
  cfg.learning_rate = 10.0;
  cfg.epochs = 50;
  try {
    train(s, cfg);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.code(), "DIVERGED");
  }
}

TEST(ModelIo, SaveLoadBitIdentical) {
  auto s = random_samples(30, 15);
  TrainConfig cfg;
  cfg.hidden = {16};
  cfg.epochs = 5;
  cfg.seed = 2;
  ModelParams p = train(s, cfg);
  auto path = std::filesystem::temp_directory_path() / "fewlat_model_test.json";
  save_model(p, path);
  ModelParams q = load_model(path);
  for (const auto& r : s) {
    double a = forward(p, r.x), b = forward(q, r.x);
    EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
  }
  EXPECT_EQ(model_to_json(q), model_to_json(p));
  std::filesystem::remove(path);
  EXPECT_THROW(model_from_json("{\"format\":\"other\"}"), ParseError);
  EXPECT_THROW(model_from_json("not json"), ParseError);
}

TEST(Standardize, IdempotentOnUnitStats) {
  auto s = random_samples(40, 16);
  FeatureStats st = compute_feature_stats(s);
  std::vector<RegressionSample> z = s;
  for (auto& r : z) r.x = standardize(st, r.x);
  FeatureStats zs = compute_feature_stats(z);
  for (int k = 0; k < kFeatureDim; ++k) {
    EXPECT_NEAR(zs.mean[k], 0.0, 1e-12);
    EXPECT_NEAR(zs.std[k], 1.0, 1e-12);
  }
  FeatureStats unit{Eigen::VectorXd::Zero(kFeatureDim), Eigen::VectorXd::Ones(kFeatureDim), {}};
  for (const auto& r : z) {
    auto again = standardize(unit, r.x);
    for (int k = 0; k < kFeatureDim; ++k) EXPECT_NEAR(again[k], r.x[k], 1e-12);
  }
}

TEST(Standardize, ZeroVarianceFlagged) {
  std::vector<RegressionSample> s = {{{1.0, 5.0}, 1.0, 1.0}, {{2.0, 5.0}, 1.0, 1.0}};
  FeatureStats st = compute_feature_stats(s);
  EXPECT_EQ(st.std[1], 1.0);
  EXPECT_EQ(st.unit_std_features, std::vector<int>{1});
  EXPECT_EQ(st.std[0], 0.5);
}

}  // namespace
}  // namespace fewlat
