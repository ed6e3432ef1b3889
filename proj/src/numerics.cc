#include "relclass/numerics.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace relclass {

std::vector<double> affine(const Matrix& w, std::span<const double> x,
                           std::span<const double> b) {
  require_shape(w.cols() == x.size(), "affine: W is " + shape_string(w) +
                                          " but x has " + std::to_string(x.size()) +
                                          " entries");
  require_shape(b.empty() || b.size() == w.rows(), "affine: bias length mismatch");
  std::vector<double> y(w.rows());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    auto row = w.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) acc += row[j] * x[j];
    y[i] = b.empty() ? acc : acc + b[i];
  }
  return y;
}

AffineGrads affine_backward(const Matrix& w, std::span<const double> x,
                            std::span<const double> dy) {
  AffineGrads g{Matrix(w.rows(), w.cols()), std::vector<double>(x.size(), 0.0),
                std::vector<double>(dy.begin(), dy.end())};
  affine_backward_accumulate(w, x, dy, g.dw, g.dx);
  return g;
}

void affine_backward_accumulate(const Matrix& w, std::span<const double> x,
                                std::span<const double> dy, Matrix& dw,
                                std::span<double> dx) {
  require_shape(w.cols() == x.size() && w.rows() == dy.size(),
                "affine backward: shape mismatch against W " + shape_string(w));
  require_shape(dw.rows() == w.rows() && dw.cols() == w.cols(),
                "affine backward: dW has wrong shape");
  require_shape(dx.empty() || dx.size() == x.size(), "affine backward: dx length");
  for (std::size_t i = 0; i < w.rows(); ++i) {
    const double g = dy[i];
    if (g == 0.0) continue;
    auto wrow = w.row(i);
    auto drow = dw.row(i);
    for (std::size_t j = 0; j < x.size(); ++j) drow[j] += g * x[j];
    if (!dx.empty()) {
      for (std::size_t j = 0; j < x.size(); ++j) dx[j] += g * wrow[j];
    }
  }
}

std::vector<double> tanh_act(std::span<const double> x) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
  return y;
}

std::vector<double> tanh_backward(std::span<const double> y, std::span<const double> dy) {
  require_shape(y.size() == dy.size(), "tanh backward: length mismatch");
  std::vector<double> dx(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = dy[i] * (1.0 - y[i] * y[i]);
  return dx;
}

double capped_relu(double x, double cap) { return std::min(std::max(x, 0.0), cap); }

std::vector<double> capped_relu(std::span<const double> x, double cap) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = capped_relu(x[i], cap);
  return y;
}

std::vector<double> capped_relu_backward(std::span<const double> x,
                                         std::span<const double> dy, double cap) {
  require_shape(x.size() == dy.size(), "capped relu backward: length mismatch");
  std::vector<double> dx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    dx[i] = (x[i] > 0.0 && x[i] < cap) ? dy[i] : 0.0;
  }
  return dx;
}

Matrix conv_over_time(const Matrix& input, const Matrix& weights,
                      std::span<const double> bias, std::size_t window) {
  const std::size_t steps = input.rows();
  const std::size_t width = input.cols();
  require_shape(window >= 1, "convolution window must be positive");
  require_shape(weights.cols() == window * width,
                "convolution filters are " + shape_string(weights) + " but input rows are " +
                    std::to_string(width) + " wide with window " + std::to_string(window));
  require_shape(bias.size() == weights.rows(), "convolution bias length mismatch");
  if (steps < window) {
    throw ShapeError("convolution input has " + std::to_string(steps) +
                     " steps, fewer than window " + std::to_string(window));
  }
  const std::size_t out_steps = steps - window + 1;
  const std::size_t patch = window * width;
  Matrix out(weights.rows(), out_steps);
  const double* in = input.data().data();
  for (std::size_t k = 0; k < weights.rows(); ++k) {
    const double* f = weights.row(k).data();
    for (std::size_t t = 0; t < out_steps; ++t) {
      const double* x = in + t * width;
      double acc = 0.0;
      for (std::size_t p = 0; p < patch; ++p) acc += f[p] * x[p];
      out(k, t) = acc + bias[k];
    }
  }
  return out;
}

Matrix conv_over_time(const Matrix& input, const FilterBank& bank) {
  require_shape(bank.feature_width == input.cols(), "filter bank feature width mismatch");
  return conv_over_time(input, bank.weights, bank.bias, bank.window);
}

void conv_over_time_backward(const Matrix& input, const Matrix& weights,
                             std::size_t window, const Matrix& dout, Matrix& dweights,
                             std::span<double> dbias, Matrix* dinput) {
  const std::size_t width = input.cols();
  const std::size_t patch = window * width;
  require_shape(input.rows() >= window, "convolution backward: input shorter than window");
  const std::size_t out_steps = input.rows() - window + 1;
  require_shape(dout.rows() == weights.rows() && dout.cols() == out_steps,
                "convolution backward: dout has shape " + shape_string(dout));
  require_shape(dweights.rows() == weights.rows() && dweights.cols() == patch,
                "convolution backward: dweights has wrong shape");
  require_shape(dbias.size() == weights.rows(), "convolution backward: dbias length");
  if (dinput) {
    require_shape(dinput->rows() == input.rows() && dinput->cols() == width,
                  "convolution backward: dinput has wrong shape");
  }
  const double* in = input.data().data();
  for (std::size_t k = 0; k < weights.rows(); ++k) {
    const double* f = weights.row(k).data();
    double* df = dweights.row(k).data();
    for (std::size_t t = 0; t < out_steps; ++t) {
      const double g = dout(k, t);
      if (g == 0.0) continue;
      dbias[k] += g;
      const double* x = in + t * width;
      for (std::size_t p = 0; p < patch; ++p) df[p] += g * x[p];
      if (dinput) {
        double* dx = dinput->data().data() + t * width;
        for (std::size_t p = 0; p < patch; ++p) dx[p] += g * f[p];
      }
    }
  }
}

PoolResult max_pool_over_time(const Matrix& feature_map) {
  if (feature_map.cols() == 0) throw ShapeError("max pooling over an empty time axis");
  PoolResult r{std::vector<double>(feature_map.rows()),
               std::vector<std::size_t>(feature_map.rows())};
  for (std::size_t k = 0; k < feature_map.rows(); ++k) {
    auto row = feature_map.row(k);
    std::size_t best = 0;
    for (std::size_t t = 1; t < row.size(); ++t) {
      if (row[t] > row[best]) best = t;
    }
    r.values[k] = row[best];
    r.argmax[k] = best;
  }
  return r;
}

Matrix max_pool_backward(std::span<const double> dy, std::span<const std::size_t> argmax,
                         std::size_t time_steps) {
  require_shape(dy.size() == argmax.size(), "max pool backward: length mismatch");
  Matrix d(dy.size(), time_steps);
  for (std::size_t k = 0; k < dy.size(); ++k) {
    require_shape(argmax[k] < time_steps, "max pool backward: argmax out of range");
    d(k, argmax[k]) = dy[k];
  }
  return d;
}

std::vector<double> softmax(std::span<const double> scores) {
  if (scores.empty()) return {};
  const double m = *std::max_element(scores.begin(), scores.end());
  std::vector<double> p(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    p[i] = std::exp(scores[i] - m);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

std::vector<double> softmax_backward(std::span<const double> probs,
                                     std::span<const double> dprobs) {
  require_shape(probs.size() == dprobs.size(), "softmax backward: length mismatch");
  double dot = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) dot += probs[i] * dprobs[i];
  std::vector<double> dx(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) dx[i] = probs[i] * (dprobs[i] - dot);
  return dx;
}

double clip_gradients(GradientSet& grads, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("clip threshold must be positive");
  const double norm = std::sqrt(grads.squared_norm());
  if (norm > threshold) grads.scale(threshold / norm);
  return norm;
}

double softplus(double z) {
  // Below the switch point the literal formula is exact enough and matches
  // the textbook expression bit for bit.
  if (z <= 30.0) return std::log(1.0 + std::exp(z));
  return z + std::log1p(std::exp(-z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace relclass
