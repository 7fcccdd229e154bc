#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ffpred/features.hpp"
#include "ffpred/rng.hpp"

namespace ffpred {

enum class Activation { kSigmoid, kTanh };

inline const char* activation_name(Activation a) {
  return a == Activation::kSigmoid ? "sigmoid" : "tanh";
}

inline Activation parse_activation(const std::string& name) {
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "tanh") return Activation::kTanh;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

inline double activate(Activation a, double z) {
  return a == Activation::kSigmoid ? 1.0 / (1.0 + std::exp(-z)) : std::tanh(z);
}

// derivative expressed through the activation value
inline double activate_grad(Activation a, double h) {
  return a == Activation::kSigmoid ? h * (1.0 - h) : 1.0 - h * h;
}

struct MlpConfig {
  int n_hidden = 50;
  Activation activation = Activation::kSigmoid;
  int n_epochs = 50;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
  double init_scale = 0.1;
};

inline void validate_config(const MlpConfig& c) {
  if (c.n_hidden < 1) throw std::invalid_argument("n_hidden must be >= 1");
  if (c.n_epochs < 1) throw std::invalid_argument("n_epochs must be >= 1");
  if (c.learning_rate < 0.0) throw std::invalid_argument("learning_rate must be >= 0");
  if (c.init_scale < 0.0) throw std::invalid_argument("init_scale must be >= 0");
}

// Single hidden layer, linear output:
//   h_k = act(sum_d w_dk x_d + b_k),   y_hat = sum_k w_o[k] h_k + b_o
struct MlpModel {
  std::size_t dims = 0;
  int n_hidden = 0;
  Activation activation = Activation::kSigmoid;
  std::vector<double> hidden_w;  // dims x n_hidden, row-major [d * n_hidden + k]
  std::vector<double> hidden_b;  // n_hidden
  std::vector<double> out_w;     // n_hidden
  double out_b = 0.0;

  std::size_t param_count() const { return hidden_w.size() + hidden_b.size() + out_w.size() + 1; }

  // flattened parameter order: hidden_w, hidden_b, out_w, out_b
  double get_param(std::size_t p) const {
    if (p < hidden_w.size()) return hidden_w[p];
    p -= hidden_w.size();
    if (p < hidden_b.size()) return hidden_b[p];
    p -= hidden_b.size();
    if (p < out_w.size()) return out_w[p];
    return out_b;
  }

  void set_param(std::size_t p, double v) {
    if (p < hidden_w.size()) {
      hidden_w[p] = v;
      return;
    }
    p -= hidden_w.size();
    if (p < hidden_b.size()) {
      hidden_b[p] = v;
      return;
    }
    p -= hidden_b.size();
    if (p < out_w.size()) {
      out_w[p] = v;
      return;
    }
    out_b = v;
  }

  bool operator==(const MlpModel&) const = default;
};

// Weights uniform in [-init_scale, init_scale] drawn deterministically from
// the seed (hidden weights first, then output weights); biases zero.
inline MlpModel mlp_init(const MlpConfig& config, std::size_t dims) {
  validate_config(config);
  if (dims < 1) throw std::invalid_argument("mlp_init: dims must be >= 1");
  MlpModel m;
  m.dims = dims;
  m.n_hidden = config.n_hidden;
  m.activation = config.activation;
  std::mt19937_64 rng(config.seed);
  m.hidden_w.resize(dims * config.n_hidden);
  for (auto& w : m.hidden_w) w = uniform_real(rng, -config.init_scale, config.init_scale);
  m.hidden_b.assign(config.n_hidden, 0.0);
  m.out_w.resize(config.n_hidden);
  for (auto& w : m.out_w) w = uniform_real(rng, -config.init_scale, config.init_scale);
  m.out_b = 0.0;
  return m;
}

inline std::vector<double> mlp_hidden(const MlpModel& m, std::span<const double> x) {
  std::vector<double> h(m.n_hidden);
  for (int k = 0; k < m.n_hidden; ++k) {
    double z = m.hidden_b[k];
    for (std::size_t d = 0; d < m.dims; ++d) z += m.hidden_w[d * m.n_hidden + k] * x[d];
    h[k] = activate(m.activation, z);
  }
  return h;
}

inline double mlp_forward(const MlpModel& m, std::span<const double> x) {
  if (x.size() != m.dims)
    throw std::invalid_argument("mlp_forward: expected " + std::to_string(m.dims) +
                                " features, got " + std::to_string(x.size()));
  auto h = mlp_hidden(m, x);
  double y = m.out_b;
  for (int k = 0; k < m.n_hidden; ++k) y += m.out_w[k] * h[k];
  return y;
}

inline double mlp_case_loss(const MlpModel& m, const FeatureCase& c) {
  double r = mlp_forward(m, c.features) - c.label;
  return 0.5 * r * r;
}

// Analytic gradient of 0.5 * (y_hat - y)^2 in flattened parameter order.
inline std::vector<double> mlp_case_gradient(const MlpModel& m, const FeatureCase& c) {
  auto h = mlp_hidden(m, c.features);
  double y_hat = m.out_b;
  for (int k = 0; k < m.n_hidden; ++k) y_hat += m.out_w[k] * h[k];
  double r = y_hat - c.label;

  std::vector<double> grad(m.param_count(), 0.0);
  std::size_t hw = m.hidden_w.size();
  std::size_t hb = m.hidden_b.size();
  for (int k = 0; k < m.n_hidden; ++k) {
    double back = r * m.out_w[k] * activate_grad(m.activation, h[k]);
    for (std::size_t d = 0; d < m.dims; ++d)
      grad[d * m.n_hidden + k] = back * c.features[d];
    grad[hw + k] = back;
    grad[hw + hb + k] = r * h[k];
  }
  grad[hw + hb + m.out_w.size()] = r;
  return grad;
}

struct MlpTrainResult {
  MlpModel model;
  std::vector<double> loss_trace;  // per-epoch mean of the per-case losses
};

// Stochastic gradient descent on 0.5 * (y_hat - y)^2: every epoch visits
// each case once in a freshly shuffled order and applies an immediate
// per-case update. All shuffling derives from config.seed.
inline MlpTrainResult mlp_train(MlpModel model, const std::vector<FeatureCase>& train,
                                const MlpConfig& config) {
  validate_config(config);
  if (train.empty()) throw std::invalid_argument("mlp_train: empty training set");
  for (const auto& c : train)
    if (c.features.size() != model.dims)
      throw std::invalid_argument("mlp_train: case dimensionality mismatch");

  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  MlpTrainResult result;
  result.loss_trace.reserve(config.n_epochs);

  for (int epoch = 0; epoch < config.n_epochs; ++epoch) {
    auto order = shuffled_indices(train.size(), rng);
    double loss_sum = 0.0;
    for (auto idx : order) {
      const auto& c = train[idx];
      auto h = mlp_hidden(model, c.features);
      double y_hat = model.out_b;
      for (int k = 0; k < model.n_hidden; ++k) y_hat += model.out_w[k] * h[k];
      double r = y_hat - c.label;
      loss_sum += 0.5 * r * r;

      double lr = config.learning_rate;
      for (int k = 0; k < model.n_hidden; ++k) {
        double back = r * model.out_w[k] * activate_grad(model.activation, h[k]);
        for (std::size_t d = 0; d < model.dims; ++d)
          model.hidden_w[d * model.n_hidden + k] -= lr * back * c.features[d];
        model.hidden_b[k] -= lr * back;
        model.out_w[k] -= lr * r * h[k];
      }
      model.out_b -= lr * r;
    }
    double epoch_loss = loss_sum / static_cast<double>(train.size());
    if (!std::isfinite(epoch_loss))
      throw std::runtime_error("mlp_train: loss diverged (non-finite) in epoch " +
                               std::to_string(epoch + 1));
    result.loss_trace.push_back(epoch_loss);
  }
  result.model = std::move(model);
  return result;
}

// Max relative discrepancy between the analytic gradient and central
// differences (f(p+h) - f(p-h)) / 2h over every parameter.
inline double finite_diff_check(const MlpModel& model, const FeatureCase& c, double h) {
  if (h <= 0.0) throw std::invalid_argument("finite_diff_check: h must be > 0");
  auto analytic = mlp_case_gradient(model, c);
  MlpModel probe = model;
  double worst = 0.0;
  for (std::size_t p = 0; p < model.param_count(); ++p) {
    double saved = probe.get_param(p);
    probe.set_param(p, saved + h);
    double plus = mlp_case_loss(probe, c);
    probe.set_param(p, saved - h);
    double minus = mlp_case_loss(probe, c);
    probe.set_param(p, saved);
    double numeric = (plus - minus) / (2.0 * h);
    double denom = std::max({1e-4, std::abs(analytic[p]), std::abs(numeric)});
    worst = std::max(worst, std::abs(analytic[p] - numeric) / denom);
  }
  return worst;
}

inline nlohmann::json mlp_model_to_json(const MlpModel& m) {
  nlohmann::json j;
  j["dims"] = m.dims;
  j["n_hidden"] = m.n_hidden;
  j["activation"] = activation_name(m.activation);
  j["hidden_w"] = m.hidden_w;
  j["hidden_b"] = m.hidden_b;
  j["out_w"] = m.out_w;
  j["out_b"] = m.out_b;
  return j;
}

inline MlpModel mlp_model_from_json(const nlohmann::json& j) {
  MlpModel m;
  m.dims = j.at("dims").get<std::size_t>();
  m.n_hidden = j.at("n_hidden").get<int>();
  m.activation = parse_activation(j.at("activation").get<std::string>());
  m.hidden_w = j.at("hidden_w").get<std::vector<double>>();
  m.hidden_b = j.at("hidden_b").get<std::vector<double>>();
  m.out_w = j.at("out_w").get<std::vector<double>>();
  m.out_b = j.at("out_b").get<double>();
  return m;
}

}  // namespace ffpred
