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

// Fully connected latency regressor over (one-hot architecture, device
// counters). Hidden layers are rectified; the output is linear in the
// transformed target space (log latency by default).

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fewlat/archspace.hpp"
#include "fewlat/dataset.hpp"

namespace fewlat {

inline constexpr int kFeatureDim = kOneHotDim + kNumCounters;

// Raw features: 30 one-hot entries followed by the 10 device counters.
// Standardization happens inside the model with frozen statistics.
using FeatureVector = std::array<double, kFeatureDim>;

FeatureVector make_features(const CellArchitecture& arch,
                            const DeviceCounters& counters);

enum class TargetTransform { kLog, kIdentity };

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

struct ModelParams {
  std::vector<int> layer_dims;
  std::vector<DenseLayer> layers;
  Eigen::VectorXd input_mean;
  Eigen::VectorXd input_std;
  std::vector<int> unit_std_features;  // zero-variance inputs given std 1
  TargetTransform target_transform = TargetTransform::kLog;
  std::uint64_t train_seed = 0;
  double final_loss = 0.0;
};

// He-normal weights, zero biases, identity standardization.
ModelParams init_model(const std::vector<int>& layer_dims, std::uint64_t seed,
                       TargetTransform transform = TargetTransform::kLog);
// All weights and biases zero.
ModelParams zero_model(const std::vector<int>& layer_dims,
                       TargetTransform transform = TargetTransform::kLog);

// Throws ValidationError when dims do not chain or stats are malformed.
void validate(const ModelParams& params);

double transform_target(TargetTransform t, double latency_ms);
double inverse_transform(TargetTransform t, double value);

// Network output in transformed space.
double forward_transformed(const ModelParams& params, std::span<const double> x);
// Latency in ms. Throws ValidationError on a dimension mismatch.
double forward(const ModelParams& params, std::span<const double> x);

struct RegressionSample {
  std::vector<double> x;
  double label_ms = 0.0;
  double weight = 1.0;
};

struct FeatureStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
  std::vector<int> unit_std_features;
};

// Unweighted per-feature mean and population std; a zero std becomes 1.
FeatureStats compute_feature_stats(std::span<const RegressionSample> samples);
std::vector<double> standardize(const FeatureStats& stats,
                                std::span<const double> x);

struct ParamGradients {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;
};

// L = sum_i w_i (yhat_i - t(y_i))^2 / sum_i w_i.
double weighted_loss(const ModelParams& params,
                     std::span<const RegressionSample> samples);
double loss_and_gradient(const ModelParams& params,
                         std::span<const RegressionSample> samples,
                         ParamGradients& grad);

struct TrainConfig {
  std::vector<int> hidden = {128, 128};
  double learning_rate = 1e-3;
  int epochs = 300;
  int batch_size = 64;
  std::uint64_t seed = 0;
  double weight_decay = 0.0;  // decoupled, applied to weight matrices
  double momentum = 0.0;      // heavy-ball; 0 gives plain SGD
  TargetTransform target_transform = TargetTransform::kLog;
};

void validate(const TrainConfig& cfg);

// Seeded mini-batch gradient descent on the weighted loss. Throws
// NumericalError (code DIVERGED) if the loss becomes non-finite.
ModelParams train(std::span<const RegressionSample> samples,
                  const TrainConfig& cfg);

struct GradientCheckResult {
  double max_rel_error = 0.0;
  int checked = 0;
  int skipped_kinks = 0;  // perturbation flipped a rectifier
};

// Central finite differences against loss_and_gradient on up to
// `max_params` seeded parameters. Relative error uses
// max(|analytic|, |numeric|, 1e-6) as denominator.
GradientCheckResult gradient_check(const ModelParams& params,
                                   std::span<const RegressionSample> samples,
                                   double h, std::uint64_t seed,
                                   int max_params = 64);

std::string model_to_json(const ModelParams& params);
ModelParams model_from_json(std::string_view text);
void save_model(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);

}  // namespace fewlat
