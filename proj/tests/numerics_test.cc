#include "relclass/numerics.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.h"
#include "test_util.h"

namespace relclass {
namespace {

using testing::numeric_gradient;
using testing::oracle_conv;
using testing::random_matrix;
using testing::random_vector;
using testing::uniform_size;

TEST(Affine, MatchesLoopOracleExactly) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto w = random_matrix(uniform_size(rng, 1, 7), uniform_size(rng, 1, 9), rng);
    const auto x = random_vector(w.cols(), rng);
    const auto b = random_vector(w.rows(), rng);
    const auto y = affine(w, x, b);
    for (std::size_t i = 0; i < w.rows(); ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < w.cols(); ++j) sum += w(i, j) * x[j];
      EXPECT_EQ(y[i], sum + b[i]);
    }
  }
}

TEST(Affine, RejectsShapeMismatch) {
  Matrix w(2, 3);
  std::vector<double> x(4);
  EXPECT_THROW(affine(w, x), ShapeError);
}

TEST(Affine, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  auto w = random_matrix(4, 5, rng);
  auto x = random_vector(5, rng);
  const auto dy = random_vector(4, rng);
  auto f = [&] {
    const auto y = affine(w, x);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += dy[i] * y[i];
    return s;
  };
  const auto g = affine_backward(w, x, dy);
  const auto ndx = numeric_gradient(f, x);
  for (std::size_t j = 0; j < x.size(); ++j) EXPECT_NEAR(g.dx[j], ndx[j], 1e-8);
  const auto ndw = numeric_gradient(f, w.data());
  for (std::size_t k = 0; k < ndw.size(); ++k) EXPECT_NEAR(g.dw.data()[k], ndw[k], 1e-8);
  for (std::size_t i = 0; i < dy.size(); ++i) EXPECT_EQ(g.db[i], dy[i]);
}

TEST(ConvOverTime, MatchesBruteForceOracleBitForBit) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = testing::random_conv_instance(rng);
    EXPECT_EQ(conv_over_time(c.input, c.weights, c.bias, c.window),
              oracle_conv(c.sentence, c.filters, c.bias))
        << "trial " << trial;
  }
}

TEST(ConvOverTime, OutputLengthAndShortInput) {
  Matrix input(5, 2, 1.0);
  Matrix weights(3, 3 * 2, 0.5);
  std::vector<double> bias(3, 0.0);
  const Matrix out = conv_over_time(input, weights, bias, 3);
  EXPECT_EQ(out.rows(), 3u);
  EXPECT_EQ(out.cols(), 3u);
  EXPECT_DOUBLE_EQ(out(0, 0), 3.0);
  EXPECT_THROW(conv_over_time(Matrix(2, 2), weights, bias, 3), ShapeError);
  EXPECT_THROW(conv_over_time(input, Matrix(3, 5), bias, 3), ShapeError);
}

TEST(ConvOverTime, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  const std::size_t d = 3, w = 2, T = 6, filters = 4;
  auto input = random_matrix(T, d, rng);
  auto weights = random_matrix(filters, w * d, rng);
  auto bias = random_vector(filters, rng);
  const Matrix dout = random_matrix(filters, T - w + 1, rng);
  auto f = [&] {
    const Matrix out = conv_over_time(input, weights, bias, w);
    double s = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) s += out.data()[k] * dout.data()[k];
    return s;
  };
  Matrix dweights(filters, w * d);
  std::vector<double> dbias(filters, 0.0);
  Matrix dinput(T, d);
  conv_over_time_backward(input, weights, w, dout, dweights, dbias, &dinput);
  const auto nw = numeric_gradient(f, weights.data());
  for (std::size_t k = 0; k < nw.size(); ++k) EXPECT_NEAR(dweights.data()[k], nw[k], 1e-8);
  const auto nb = numeric_gradient(f, bias);
  for (std::size_t k = 0; k < nb.size(); ++k) EXPECT_NEAR(dbias[k], nb[k], 1e-8);
  const auto ni = numeric_gradient(f, input.data());
  for (std::size_t k = 0; k < ni.size(); ++k) EXPECT_NEAR(dinput.data()[k], ni[k], 1e-8);
}

TEST(MaxPool, MatchesOracleBitForBit) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix m = random_matrix(uniform_size(rng, 1, 6), uniform_size(rng, 1, 10), rng);
    const PoolResult p = max_pool_over_time(m);
    const auto [values, argmax] = testing::oracle_max_pool(m);
    EXPECT_EQ(p.values, values);
    EXPECT_EQ(p.argmax, argmax);
  }
}

TEST(MaxPool, TiesGoToLowestIndexAndBackwardRoutes) {
  Matrix m(2, 4);
  m.data() = {1, 3, 3, 2, -1, -1, -1, -1};
  const PoolResult p = max_pool_over_time(m);
  EXPECT_EQ(p.argmax[0], 1u);
  EXPECT_EQ(p.argmax[1], 0u);
  EXPECT_EQ(p.values[0], 3.0);
  const std::vector<double> dy = {0.5, -2.0};
  const Matrix back = max_pool_backward(dy, p.argmax, 4);
  Matrix expected(2, 4);
  expected(0, 1) = 0.5;
  expected(1, 0) = -2.0;
  EXPECT_EQ(back, expected);
}

TEST(Softmax, StableForLargeScores) {
  const auto p = softmax(std::vector<double>{1000.0, 0.0});
  EXPECT_NEAR(p[0], 1.0, 1e-12);
  EXPECT_NEAR(p[1], 0.0, 1e-12);
  EXPECT_TRUE(all_finite(p));
}

TEST(Softmax, SumsToOneAndBackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(6);
  auto z = random_vector(7, rng, 3.0);
  const auto dp = random_vector(7, rng);
  const auto p = softmax(z);
  double sum = 0.0;
  for (double v : p) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  auto f = [&] {
    const auto q = softmax(z);
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += dp[i] * q[i];
    return s;
  };
  const auto dz = softmax_backward(p, dp);
  const auto nz = numeric_gradient(f, z);
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_NEAR(dz[i], nz[i], 1e-8);
}

TEST(Tanh, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  auto x = random_vector(6, rng, 2.0);
  const auto dy = random_vector(6, rng);
  auto f = [&] {
    const auto y = tanh_act(x);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += dy[i] * y[i];
    return s;
  };
  const auto dx = tanh_backward(tanh_act(x), dy);
  const auto nx = numeric_gradient(f, x);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(dx[i], nx[i], 1e-8);
}

TEST(CappedRelu, ValuesAndSubgradients) {
  EXPECT_EQ(capped_relu(-0.5, 1.0), 0.0);
  EXPECT_EQ(capped_relu(0.25, 1.0), 0.25);
  EXPECT_EQ(capped_relu(3.0, 1.0), 1.0);
  const std::vector<double> x = {-1.0, 0.0, 0.5, 1.0, 2.0};
  const std::vector<double> dy = {1, 1, 1, 1, 1};
  EXPECT_EQ(capped_relu_backward(x, dy, 1.0), (std::vector<double>{0, 0, 1, 0, 0}));
}

TEST(Softplus, MatchesLiteralFormulaAndAvoidsOverflow) {
  for (double z = -40.0; z <= 30.0; z += 0.37) {
    EXPECT_EQ(softplus(z), std::log(1.0 + std::exp(z))) << z;
  }
  EXPECT_DOUBLE_EQ(softplus(1000.0), 1000.0);
  EXPECT_TRUE(std::isfinite(softplus(1e300)));
  EXPECT_NEAR(sigmoid(0.0), 0.5, 1e-15);
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
}

TEST(ClipGradients, RescalesOnlyAboveThreshold) {
  ParameterSet params;
  params.add("w", ParamKind::kWeight, Matrix(1, 2));
  params.add("e", ParamKind::kEmbedding, Matrix(3, 2));
  GradientSet g(params);
  g.dense(0).data() = {3.0, 0.0};
  const std::vector<double> row = {0.0, 4.0};
  g.add_row(1, 2, row);
  EXPECT_DOUBLE_EQ(clip_gradients(g, 10.0), 5.0);
  EXPECT_EQ(g.dense(0).data()[0], 3.0);
  EXPECT_DOUBLE_EQ(clip_gradients(g, 1.0), 5.0);
  EXPECT_NEAR(std::sqrt(g.squared_norm()), 1.0, 1e-15);
  EXPECT_NEAR(g.at(1, 2, 1), 0.8, 1e-15);
}

}  // namespace
}  // namespace relclass
