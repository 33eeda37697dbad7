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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <json.hpp>

#include "fewlat/csv.hpp"
#include "fewlat/errors.hpp"

namespace fewlat {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Batch {
  MatrixXd x;  // standardized, in_dim x n
  VectorXd target;
  VectorXd weight;
};

struct ForwardCache {
  std::vector<MatrixXd> pre;  // pre-activations per layer
  std::vector<MatrixXd> act;  // act[0] = input, act[l + 1] = output of layer l
};

void forward_batch(const ModelParams& p, const MatrixXd& x, ForwardCache& c) {
  const std::size_t n_layers = p.layers.size();
  c.pre.resize(n_layers);
  c.act.resize(n_layers + 1);
  c.act[0] = x;
  for (std::size_t l = 0; l < n_layers; ++l) {
    c.pre[l] = p.layers[l].weight * c.act[l];
    c.pre[l].colwise() += p.layers[l].bias;
    if (l + 1 < n_layers) {
      c.act[l + 1] = c.pre[l].cwiseMax(0.0);
    } else {
      c.act[l + 1] = c.pre[l];
    }
  }
}

double batch_loss_and_gradient(const ModelParams& p, const Batch& b,
                               ParamGradients* grad) {
  ForwardCache c;
  forward_batch(p, b.x, c);
  const double wsum = b.weight.sum();
  Eigen::RowVectorXd resid = c.act.back().row(0) - b.target.transpose();
  double loss = (b.weight.transpose().array() * resid.array().square()).sum() /
                wsum;
  if (!grad) return loss;

  const std::size_t n_layers = p.layers.size();
  grad->weight.resize(n_layers);
  grad->bias.resize(n_layers);
  MatrixXd delta =
      (2.0 / wsum) * (resid.array() * b.weight.transpose().array()).matrix();
  for (std::size_t l = n_layers; l-- > 0;) {
    grad->weight[l].noalias() = delta * c.act[l].transpose();
    grad->bias[l] = delta.rowwise().sum();
    if (l == 0) break;
    MatrixXd back = p.layers[l].weight.transpose() * delta;
    delta = (c.pre[l - 1].array() > 0.0).select(back.array(), 0.0).matrix();
  }
  return loss;
}

Batch make_batch(const ModelParams& p, std::span<const RegressionSample> s) {
  const int in_dim = p.layer_dims.front();
  Batch b;
  b.x.resize(in_dim, static_cast<Eigen::Index>(s.size()));
  b.target.resize(static_cast<Eigen::Index>(s.size()));
  b.weight.resize(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (static_cast<int>(s[i].x.size()) != in_dim) {
      throw ValidationError("feature vector has " +
                            std::to_string(s[i].x.size()) +
                            " entries, model expects " + std::to_string(in_dim));
    }
    for (int k = 0; k < in_dim; ++k) {
      b.x(k, static_cast<Eigen::Index>(i)) =
          (s[i].x[k] - p.input_mean[k]) / p.input_std[k];
    }
    b.target[static_cast<Eigen::Index>(i)] =
        transform_target(p.target_transform, s[i].label_ms);
    b.weight[static_cast<Eigen::Index>(i)] = s[i].weight;
  }
  return b;
}

// Rectifier on/off pattern of every hidden unit over every sample.
std::vector<bool> activation_pattern(const ModelParams& p, const Batch& b) {
  ForwardCache c;
  forward_batch(p, b.x, c);
  std::vector<bool> pattern;
  for (std::size_t l = 0; l + 1 < p.layers.size(); ++l) {
    const MatrixXd& z = c.pre[l];
    for (Eigen::Index j = 0; j < z.size(); ++j) pattern.push_back(z(j) > 0.0);
  }
  return pattern;
}

double& param_ref(ModelParams& p, std::size_t layer, bool is_bias,
                  Eigen::Index i) {
  return is_bias ? p.layers[layer].bias[i] : p.layers[layer].weight(i);
}

const char* transform_name(TargetTransform t) {
  return t == TargetTransform::kLog ? "log" : "identity";
}

}  // namespace

FeatureVector make_features(const CellArchitecture& arch,
                            const DeviceCounters& counters) {
  FeatureVector x{};
  OneHot oh = encode_one_hot(arch);
  std::copy(oh.begin(), oh.end(), x.begin());
  std::copy(counters.values.begin(), counters.values.end(),
            x.begin() + kOneHotDim);
  return x;
}

ModelParams zero_model(const std::vector<int>& layer_dims,
                       TargetTransform transform) {
  if (layer_dims.size() < 2 || layer_dims.back() != 1) {
    throw ValidationError("layer_dims needs >= 2 entries ending in 1");
  }
  ModelParams p;
  p.layer_dims = layer_dims;
  p.target_transform = transform;
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    if (layer_dims[l] < 1 || layer_dims[l + 1] < 1) {
      throw ValidationError("layer_dims entries must be positive");
    }
    p.layers.push_back({MatrixXd::Zero(layer_dims[l + 1], layer_dims[l]),
                        VectorXd::Zero(layer_dims[l + 1])});
  }
  p.input_mean = VectorXd::Zero(layer_dims.front());
  p.input_std = VectorXd::Ones(layer_dims.front());
  return p;
}

ModelParams init_model(const std::vector<int>& layer_dims, std::uint64_t seed,
                       TargetTransform transform) {
  ModelParams p = zero_model(layer_dims, transform);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& layer : p.layers) {
    const double scale = std::sqrt(2.0 / static_cast<double>(layer.weight.cols()));
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
      layer.weight(i) = scale * gauss(rng);
    }
  }
  p.train_seed = seed;
  return p;
}

void validate(const ModelParams& p) {
  if (p.layer_dims.size() < 2 || p.layers.size() + 1 != p.layer_dims.size()) {
    throw ValidationError("model: layer count does not match layer_dims");
  }
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    if (p.layers[l].weight.rows() != p.layer_dims[l + 1] ||
        p.layers[l].weight.cols() != p.layer_dims[l] ||
        p.layers[l].bias.size() != p.layer_dims[l + 1]) {
      throw ValidationError("model: layer " + std::to_string(l) +
                            " does not chain with layer_dims");
    }
  }
  if (p.layer_dims.back() != 1) {
    throw ValidationError("model: output dimension must be 1");
  }
  if (p.input_mean.size() != p.layer_dims.front() ||
      p.input_std.size() != p.layer_dims.front()) {
    throw ValidationError("model: standardization stats have wrong size");
  }
  for (Eigen::Index k = 0; k < p.input_std.size(); ++k) {
    if (!(p.input_std[k] > 0.0)) {
      throw ValidationError("model: standardization std must be > 0");
    }
  }
}

double transform_target(TargetTransform t, double latency_ms) {
  return t == TargetTransform::kLog ? std::log(latency_ms) : latency_ms;
}

double inverse_transform(TargetTransform t, double value) {
  return t == TargetTransform::kLog ? std::exp(value) : value;
}

double forward_transformed(const ModelParams& p, std::span<const double> x) {
  const int in_dim = p.layer_dims.front();
  if (static_cast<int>(x.size()) != in_dim) {
    throw ValidationError("forward: input has " + std::to_string(x.size()) +
                          " features, model expects " + std::to_string(in_dim));
  }
  VectorXd a(in_dim);
  for (int k = 0; k < in_dim; ++k) a[k] = (x[k] - p.input_mean[k]) / p.input_std[k];
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    VectorXd z = p.layers[l].weight * a + p.layers[l].bias;
    a = l + 1 < p.layers.size() ? VectorXd(z.cwiseMax(0.0)) : z;
  }
  return a[0];
}

double forward(const ModelParams& p, std::span<const double> x) {
  return inverse_transform(p.target_transform, forward_transformed(p, x));
}

FeatureStats compute_feature_stats(std::span<const RegressionSample> samples) {
  if (samples.empty()) throw ValidationError("feature stats: no samples");
  const std::size_t dim = samples.front().x.size();
  FeatureStats st;
  st.mean = VectorXd::Zero(static_cast<Eigen::Index>(dim));
  st.std = VectorXd::Zero(static_cast<Eigen::Index>(dim));
  const double n = static_cast<double>(samples.size());
  for (const auto& s : samples) {
    if (s.x.size() != dim) throw ValidationError("feature stats: ragged input");
    for (std::size_t k = 0; k < dim; ++k) st.mean[k] += s.x[k];
  }
  st.mean /= n;
  for (const auto& s : samples) {
    for (std::size_t k = 0; k < dim; ++k) {
      double d = s.x[k] - st.mean[k];
      st.std[k] += d * d;
    }
  }
  for (std::size_t k = 0; k < dim; ++k) {
    st.std[k] = std::sqrt(st.std[k] / n);
    if (!(st.std[k] > 1e-12 * std::max(1.0, std::abs(st.mean[k])))) {
      st.std[k] = 1.0;
      st.unit_std_features.push_back(static_cast<int>(k));
    }
  }
  return st;
}

std::vector<double> standardize(const FeatureStats& stats,
                                std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    out[k] = (x[k] - stats.mean[k]) / stats.std[k];
  }
  return out;
}

double weighted_loss(const ModelParams& params,
                     std::span<const RegressionSample> samples) {
  return batch_loss_and_gradient(params, make_batch(params, samples), nullptr);
}

double loss_and_gradient(const ModelParams& params,
                         std::span<const RegressionSample> samples,
                         ParamGradients& grad) {
  return batch_loss_and_gradient(params, make_batch(params, samples), &grad);
}

void validate(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
  if (cfg.epochs < 1) throw ValidationError("epochs must be >= 1");
  if (cfg.batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(cfg.weight_decay >= 0.0)) throw ValidationError("weight_decay must be >= 0");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) {
    throw ValidationError("momentum must be in [0, 1)");
  }
  for (int h : cfg.hidden) {
    if (h < 1) throw ValidationError("hidden layer widths must be positive");
  }
}

ModelParams train(std::span<const RegressionSample> samples,
                  const TrainConfig& cfg) {
  validate(cfg);
  if (samples.empty()) throw ValidationError("train: no samples");
  for (const auto& s : samples) {
    if (!(s.weight > 0.0) || !std::isfinite(s.weight)) {
      throw ValidationError("train: sample weights must be positive");
    }
    if (!std::isfinite(s.label_ms) ||
        (cfg.target_transform == TargetTransform::kLog && !(s.label_ms > 0.0))) {
      throw ValidationError("train: labels must be positive under log transform");
    }
  }

  std::vector<int> dims{static_cast<int>(samples.front().x.size())};
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(1);
  ModelParams p = init_model(dims, cfg.seed, cfg.target_transform);
  FeatureStats stats = compute_feature_stats(samples);
  p.input_mean = stats.mean;
  p.input_std = stats.std;
  p.unit_std_features = stats.unit_std_features;

  Batch all = make_batch(p, samples);
  p.layers.back().bias[0] = all.weight.dot(all.target) / all.weight.sum();

  // Weight init consumed the seed's first stream; shuffling uses a second.
  std::mt19937_64 rng(cfg.seed ^ 0xd1b54a32d192ed03ULL);
  const Eigen::Index n = all.x.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  const std::size_t n_layers = p.layers.size();
  ParamGradients vel;
  for (const auto& layer : p.layers) {
    vel.weight.push_back(MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()));
    vel.bias.push_back(VectorXd::Zero(layer.bias.size()));
  }
  ParamGradients grad;
  Batch batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(cfg.batch_size, n - start);
      batch.x.resize(all.x.rows(), len);
      batch.target.resize(len);
      batch.weight.resize(len);
      for (Eigen::Index j = 0; j < len; ++j) {
        Eigen::Index src = order[static_cast<std::size_t>(start + j)];
        batch.x.col(j) = all.x.col(src);
        batch.target[j] = all.target[src];
        batch.weight[j] = all.weight[src];
      }
      double loss = batch_loss_and_gradient(p, batch, &grad);
      if (!std::isfinite(loss)) {
        throw NumericalError("DIVERGED",
                             "training diverged at epoch " +
                                 std::to_string(epoch) +
                                 "; try a smaller learning_rate");
      }
      for (std::size_t l = 0; l < n_layers; ++l) {
        vel.weight[l] = cfg.momentum * vel.weight[l] - cfg.learning_rate * grad.weight[l];
        vel.bias[l] = cfg.momentum * vel.bias[l] - cfg.learning_rate * grad.bias[l];
        if (cfg.weight_decay > 0.0) {
          p.layers[l].weight *= 1.0 - cfg.learning_rate * cfg.weight_decay;
        }
        p.layers[l].weight += vel.weight[l];
        p.layers[l].bias += vel.bias[l];
      }
    }
  }
  p.final_loss = batch_loss_and_gradient(p, all, nullptr);
  if (!std::isfinite(p.final_loss)) {
    throw NumericalError("DIVERGED",
                         "training loss is not finite; try a smaller learning_rate");
  }
  return p;
}

GradientCheckResult gradient_check(const ModelParams& params,
                                   std::span<const RegressionSample> samples,
                                   double h, std::uint64_t seed,
                                   int max_params) {
  if (!(h > 0.0)) throw ValidationError("gradient_check: h must be > 0");
  Batch b = make_batch(params, samples);
  ParamGradients grad;
  batch_loss_and_gradient(params, b, &grad);
  const std::vector<bool> base_pattern = activation_pattern(params, b);

  struct Slot {
    std::size_t layer;
    bool is_bias;
    Eigen::Index index;
  };
  std::vector<Slot> slots;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    for (Eigen::Index i = 0; i < params.layers[l].weight.size(); ++i) {
      slots.push_back({l, false, i});
    }
    for (Eigen::Index i = 0; i < params.layers[l].bias.size(); ++i) {
      slots.push_back({l, true, i});
    }
  }
  // Always cover every layer, then fill the budget with a seeded sample.
  std::mt19937_64 rng(seed);
  std::vector<Slot> chosen;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    std::vector<Slot> layer_slots;
    for (const auto& s : slots) {
      if (s.layer == l) layer_slots.push_back(s);
    }
    std::size_t per_layer = std::max<std::size_t>(
        1, static_cast<std::size_t>(max_params) / params.layers.size());
    std::sample(layer_slots.begin(), layer_slots.end(),
                std::back_inserter(chosen), per_layer, rng);
  }

  GradientCheckResult result;
  ModelParams probe = params;
  for (const auto& s : chosen) {
    double& theta = param_ref(probe, s.layer, s.is_bias, s.index);
    const double orig = theta;
    theta = orig + h;
    bool kink = activation_pattern(probe, b) != base_pattern;
    double up = batch_loss_and_gradient(probe, b, nullptr);
    theta = orig - h;
    kink = kink || activation_pattern(probe, b) != base_pattern;
    double down = batch_loss_and_gradient(probe, b, nullptr);
    theta = orig;
    if (kink) {
      ++result.skipped_kinks;
      continue;
    }
    double numeric = (up - down) / (2.0 * h);
    double analytic = s.is_bias ? grad.bias[s.layer][s.index]
                                : grad.weight[s.layer](s.index);
    double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    result.max_rel_error =
        std::max(result.max_rel_error, std::abs(analytic - numeric) / denom);
    ++result.checked;
  }
  return result;
}

std::string model_to_json(const ModelParams& p) {
  validate(p);
  nlohmann::json j;
  j["format"] = "fewlat-mlp-v1";
  j["layer_dims"] = p.layer_dims;
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : p.layers) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(layer.weight.size()));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        w.push_back(layer.weight(r, c));
      }
    }
    std::vector<double> bias(layer.bias.data(), layer.bias.data() + layer.bias.size());
    layers.push_back({{"weight", w}, {"bias", bias}});
  }
  j["layers"] = layers;
  j["input_mean"] = std::vector<double>(p.input_mean.data(),
                                        p.input_mean.data() + p.input_mean.size());
  j["input_std"] = std::vector<double>(p.input_std.data(),
                                       p.input_std.data() + p.input_std.size());
  j["unit_std_features"] = p.unit_std_features;
  j["target_transform"] = transform_name(p.target_transform);
  j["train_seed"] = p.train_seed;
  j["final_loss"] = p.final_loss;
  return j.dump(1);
}

ModelParams model_from_json(std::string_view text) {
  ModelParams p;
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("format", std::string()) != "fewlat-mlp-v1") {
      throw ParseError("model: unsupported format");
    }
    p.layer_dims = j.at("layer_dims").get<std::vector<int>>();
    const auto& layers = j.at("layers");
    if (p.layer_dims.size() < 2 || layers.size() + 1 != p.layer_dims.size()) {
      throw ValidationError("model: layer count does not match layer_dims");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto w = layers[l].at("weight").get<std::vector<double>>();
      auto bias = layers[l].at("bias").get<std::vector<double>>();
      const int rows = p.layer_dims[l + 1];
      const int cols = p.layer_dims[l];
      if (w.size() != static_cast<std::size_t>(rows) * cols ||
          bias.size() != static_cast<std::size_t>(rows)) {
        throw ValidationError("model: layer " + std::to_string(l) +
                              " has wrong parameter count");
      }
      DenseLayer dl{MatrixXd(rows, cols), VectorXd(rows)};
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) dl.weight(r, c) = w[static_cast<std::size_t>(r) * cols + c];
        dl.bias[r] = bias[r];
      }
      p.layers.push_back(std::move(dl));
    }
    auto mean = j.at("input_mean").get<std::vector<double>>();
    auto sd = j.at("input_std").get<std::vector<double>>();
    p.input_mean = Eigen::Map<VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    p.input_std = Eigen::Map<VectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()));
    p.unit_std_features = j.value("unit_std_features", std::vector<int>{});
    std::string t = j.at("target_transform").get<std::string>();
    if (t == "log") {
      p.target_transform = TargetTransform::kLog;
    } else if (t == "identity") {
      p.target_transform = TargetTransform::kIdentity;
    } else {
      throw ParseError("model: unknown target_transform '" + t + "'");
    }
    p.train_seed = j.value("train_seed", std::uint64_t{0});
    const auto& loss = j.at("final_loss");
    p.final_loss = loss.is_null() ? std::numeric_limits<double>::quiet_NaN()
                                  : loss.get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
  validate(p);
  return p;
}

void save_model(const ModelParams& params, const std::filesystem::path& path) {
  csv::write_text(path, model_to_json(params) + "\n");
}

ModelParams load_model(const std::filesystem::path& path) {
  return model_from_json(csv::read_text(path));
}

}  // namespace fewlat
