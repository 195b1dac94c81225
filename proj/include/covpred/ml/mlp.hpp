#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "covpred/common.hpp"
#include "covpred/rng.hpp"

namespace covpred {

struct MlprParams {
  std::vector<int> hidden_layer_sizes = {128, 64};
  std::string activation = "relu";  // "tanh", "logistic", "identity"
  std::string learning_rate = "constant";  // or "adaptive"
  int epochs = 100;
  double eta0 = 1e-3;
  int batch_size = 64;
  double tol = 1e-4;
};

/// Fully connected feed-forward regressor with a linear output unit.
struct MlpModel {
  std::vector<int> layer_sizes;                // input, hidden..., 1
  std::vector<std::vector<double>> weights;    // per connection layer, out x in
  std::vector<std::vector<double>> biases;     // per connection layer
  std::string activation = "relu";

  static double act(double z, const std::string& a) {
    if (a == "relu") return z > 0 ? z : 0.0;
    if (a == "tanh") return std::tanh(z);
    if (a == "logistic") return 1.0 / (1.0 + std::exp(-z));
    return z;  // identity
  }
  static double act_grad(double z, const std::string& a) {
    if (a == "relu") return z > 0 ? 1.0 : 0.0;
    if (a == "tanh") {
      double t = std::tanh(z);
      return 1.0 - t * t;
    }
    if (a == "logistic") {
      double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
    return 1.0;
  }

  double predict(const std::vector<double>& row) const {
    std::vector<double> cur = row;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      const int in = layer_sizes[l];
      const int out = layer_sizes[l + 1];
      std::vector<double> next(out);
      for (int o = 0; o < out; ++o) {
        double z = biases[l][o];
        const double* w = &weights[l][static_cast<std::size_t>(o) * in];
        for (int i = 0; i < in; ++i) z += w[i] * cur[i];
        next[o] = l + 1 == weights.size() ? z : act(z, activation);
      }
      cur = std::move(next);
    }
    return cur[0];
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
  }

  std::vector<double> flatten() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (std::size_t l = 0; l < weights.size(); ++l) {
      flat.insert(flat.end(), weights[l].begin(), weights[l].end());
      flat.insert(flat.end(), biases[l].begin(), biases[l].end());
    }
    return flat;
  }

  void unflatten(const std::vector<double>& flat) {
    std::size_t pos = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      for (auto& w : weights[l]) w = flat[pos++];
      for (auto& b : biases[l]) b = flat[pos++];
    }
  }
};

namespace detail {

/// Mean squared-error loss over a batch, L = 1/(2m) sum (pred - y)^2, and its
/// gradient with respect to every weight and bias (flattened layout).
inline double mlp_loss_and_grad(const MlpModel& model, const std::vector<std::vector<double>>& x,
                                const std::vector<double>& y, std::vector<double>* grad_out) {
  const std::size_t m = x.size();
  const std::size_t layers = model.weights.size();
  std::vector<std::vector<double>> grad_w(layers), grad_b(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    grad_w[l].assign(model.weights[l].size(), 0.0);
    grad_b[l].assign(model.biases[l].size(), 0.0);
  }

  double loss = 0;
  std::vector<std::vector<double>> acts(layers + 1), zs(layers);
  for (std::size_t s = 0; s < m; ++s) {
    acts[0] = x[s];
    for (std::size_t l = 0; l < layers; ++l) {
      const int in = model.layer_sizes[l];
      const int out = model.layer_sizes[l + 1];
      zs[l].assign(out, 0.0);
      acts[l + 1].assign(out, 0.0);
      for (int o = 0; o < out; ++o) {
        double z = model.biases[l][o];
        const double* w = &model.weights[l][static_cast<std::size_t>(o) * in];
        for (int i = 0; i < in; ++i) z += w[i] * acts[l][i];
        zs[l][o] = z;
        acts[l + 1][o] = l + 1 == layers ? z : MlpModel::act(z, model.activation);
      }
    }
    double err = acts[layers][0] - y[s];
    loss += 0.5 * err * err;

    // backward
    std::vector<double> delta{err / static_cast<double>(m)};
    for (std::size_t l = layers; l-- > 0;) {
      const int in = model.layer_sizes[l];
      const int out = model.layer_sizes[l + 1];
      for (int o = 0; o < out; ++o) {
        grad_b[l][o] += delta[o];
        double* gw = &grad_w[l][static_cast<std::size_t>(o) * in];
        for (int i = 0; i < in; ++i) gw[i] += delta[o] * acts[l][i];
      }
      if (l == 0) break;
      std::vector<double> prev(in, 0.0);
      for (int i = 0; i < in; ++i) {
        double s2 = 0;
        for (int o = 0; o < out; ++o)
          s2 += model.weights[l][static_cast<std::size_t>(o) * in + i] * delta[o];
        prev[i] = s2 * MlpModel::act_grad(zs[l - 1][i], model.activation);
      }
      delta = std::move(prev);
    }
  }

  if (grad_out) {
    grad_out->clear();
    grad_out->reserve(model.parameter_count());
    for (std::size_t l = 0; l < layers; ++l) {
      grad_out->insert(grad_out->end(), grad_w[l].begin(), grad_w[l].end());
      grad_out->insert(grad_out->end(), grad_b[l].begin(), grad_b[l].end());
    }
  }
  return loss / static_cast<double>(m);
}

}  // namespace detail

/// Glorot-uniform initialized network; zero biases.
inline MlpModel init_mlp(std::size_t inputs, const MlprParams& params, std::uint64_t seed) {
  MlpModel model;
  model.activation = params.activation;
  model.layer_sizes.push_back(static_cast<int>(inputs));
  for (int h : params.hidden_layer_sizes) model.layer_sizes.push_back(h);
  model.layer_sizes.push_back(1);
  Rng rng = Rng::stream(seed, 0x317a11);
  for (std::size_t l = 0; l + 1 < model.layer_sizes.size(); ++l) {
    int in = model.layer_sizes[l];
    int out = model.layer_sizes[l + 1];
    double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    std::vector<double> w(static_cast<std::size_t>(in) * out);
    for (auto& v : w) v = rng.uniform(-bound, bound);
    model.weights.push_back(std::move(w));
    model.biases.emplace_back(out, 0.0);
  }
  return model;
}

/// Mini-batch gradient descent on squared error. Zero epochs returns the
/// initialized network untouched.
inline MlpModel fit_mlp(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                        const MlprParams& params, std::uint64_t seed) {
  if (x.empty()) throw TrainingError("mlp: empty training set");
  MlpModel model = init_mlp(x[0].size(), params, seed);
  const std::size_t n = x.size();
  double eta = params.eta0;
  double best_loss = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  std::vector<std::vector<double>> batch_x;
  std::vector<double> batch_y;
  std::vector<double> grad;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    Rng rng = Rng::stream(seed, 0x3147, static_cast<std::uint64_t>(epoch));
    rng.shuffle(order);
    double epoch_loss = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += params.batch_size) {
      std::size_t end = std::min(n, start + params.batch_size);
      batch_x.clear();
      batch_y.clear();
      for (std::size_t k = start; k < end; ++k) {
        batch_x.push_back(x[order[k]]);
        batch_y.push_back(y[order[k]]);
      }
      double loss = detail::mlp_loss_and_grad(model, batch_x, batch_y, &grad);
      epoch_loss += loss;
      ++batches;
      if (!std::isfinite(loss)) throw TrainingError("mlp: loss diverged");
      std::size_t pos = 0;
      for (std::size_t l = 0; l < model.weights.size(); ++l) {
        for (auto& w : model.weights[l]) w -= eta * grad[pos++];
        for (auto& b : model.biases[l]) b -= eta * grad[pos++];
      }
    }
    epoch_loss /= static_cast<double>(batches);
    if (params.learning_rate == "adaptive" && epoch_loss > best_loss - params.tol) eta /= 2.0;
    best_loss = std::min(best_loss, epoch_loss);
  }
  return model;
}

}  // namespace covpred
