#ifndef RELCLASS_NUMERICS_H_
#define RELCLASS_NUMERICS_H_

// Numeric kernels with hand-written backward passes. Every reduction runs in
// a fixed loop order so results are reproducible bit for bit.

#include <cstddef>
#include <span>
#include <vector>

#include "relclass/parameters.h"
#include "relclass/tensor.h"

namespace relclass {

// y = W x (+ b). Each y_i is accumulated over j in ascending order starting
// from 0.0; the bias is added last.
std::vector<double> affine(const Matrix& w, std::span<const double> x,
                           std::span<const double> b = {});

struct AffineGrads {
  Matrix dw;
  std::vector<double> dx;
  std::vector<double> db;
};
AffineGrads affine_backward(const Matrix& w, std::span<const double> x,
                            std::span<const double> dy);

// Accumulating form used by the models: dw += dy x^T, dx += W^T dy.
// dx may be empty to skip the input gradient.
void affine_backward_accumulate(const Matrix& w, std::span<const double> x,
                                std::span<const double> dy, Matrix& dw,
                                std::span<double> dx);

std::vector<double> tanh_act(std::span<const double> x);
// Uses the forward output: dx = dy * (1 - y^2).
std::vector<double> tanh_backward(std::span<const double> y, std::span<const double> dy);

// min(max(x, 0), cap). The subgradient at 0 and at cap is 0.
double capped_relu(double x, double cap);
std::vector<double> capped_relu(std::span<const double> x, double cap);
std::vector<double> capped_relu_backward(std::span<const double> x,
                                         std::span<const double> dy, double cap);

// A bank of convolution filters sharing one window width. Row k of `weights`
// is filter k flattened over a window of `window` consecutive time steps, each
// of `feature_width` values: index j * feature_width + r holds the weight for
// feature r of the j-th step in the window.
struct FilterBank {
  std::size_t window = 0;
  std::size_t feature_width = 0;
  Matrix weights;  // filters x (window * feature_width)
  std::vector<double> bias;

  std::size_t filters() const { return weights.rows(); }
};

// Valid convolution over time. `input` holds one time step per row (T x d,
// i.e. the transpose of the d x T sentence matrix). Output is filters x
// (T - window + 1); entry (k, t) sums filter k against the window starting at
// step t in flattened order, then adds the bias.
Matrix conv_over_time(const Matrix& input, const Matrix& weights,
                      std::span<const double> bias, std::size_t window);
Matrix conv_over_time(const Matrix& input, const FilterBank& bank);

// Accumulates the weight and bias gradients, plus dinput when it is given.
void conv_over_time_backward(const Matrix& input, const Matrix& weights,
                             std::size_t window, const Matrix& dout, Matrix& dweights,
                             std::span<double> dbias, Matrix* dinput);

struct PoolResult {
  std::vector<double> values;
  std::vector<std::size_t> argmax;
};

// Row-wise maximum over the time axis; ties go to the lowest time index.
PoolResult max_pool_over_time(const Matrix& feature_map);
// Routes dy[k] to (k, argmax[k]); every other entry is zero.
Matrix max_pool_backward(std::span<const double> dy, std::span<const std::size_t> argmax,
                         std::size_t time_steps);

// Softmax with max subtraction.
std::vector<double> softmax(std::span<const double> scores);
std::vector<double> softmax_backward(std::span<const double> probs,
                                     std::span<const double> dprobs);

// Rescales all gradients by threshold / g when their global L2 norm g exceeds
// threshold. Returns g.
double clip_gradients(GradientSet& grads, double threshold);

// log(1 + exp(z)) without overflow for large z.
double softplus(double z);
double sigmoid(double z);

}  // namespace relclass

#endif  // RELCLASS_NUMERICS_H_
