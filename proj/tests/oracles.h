#ifndef RELCLASS_TESTS_ORACLES_H_
#define RELCLASS_TESTS_ORACLES_H_

// Brute-force reference implementations written from the model definitions,
// independent of the library code paths they are compared against.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "relclass/labels.h"
#include "relclass/rnn_model.h"
#include "relclass/tensor.h"
#include "test_util.h"

namespace relclass::testing {

// Convolution on a d x T sentence matrix S (one column per token) with d x w
// filter matrices F_k:
//   c_k(t) = sum_{j < w} sum_{r < d} F_k(r, j) S(r, t + j) + b_k
inline Matrix oracle_conv(const Matrix& sentence_dxT, const std::vector<Matrix>& filters_dxw,
                          const std::vector<double>& bias) {
  const std::size_t d = sentence_dxT.rows();
  const std::size_t T = sentence_dxT.cols();
  const std::size_t w = filters_dxw[0].cols();
  Matrix out(filters_dxw.size(), T - w + 1);
  for (std::size_t k = 0; k < filters_dxw.size(); ++k) {
    for (std::size_t t = 0; t + w <= T; ++t) {
      double sum = 0.0;
      for (std::size_t j = 0; j < w; ++j) {
        for (std::size_t r = 0; r < d; ++r) sum += filters_dxw[k](r, j) * sentence_dxT(r, t + j);
      }
      out(k, t) = sum + bias[k];
    }
  }
  return out;
}

// A random convolution problem in both the definition layout and the
// library layout (time-major input, filters flattened as j * d + r).
struct ConvInstance {
  Matrix sentence;
  std::vector<Matrix> filters;
  std::vector<double> bias;
  std::size_t window = 0;
  Matrix input;
  Matrix weights;
};

inline ConvInstance random_conv_instance(std::mt19937_64& rng) {
  ConvInstance c;
  const std::size_t d = uniform_size(rng, 1, 6);
  c.window = uniform_size(rng, 1, 5);
  const std::size_t T = uniform_size(rng, c.window, 12);
  const std::size_t n = uniform_size(rng, 1, 5);
  c.sentence = random_matrix(d, T, rng);
  for (std::size_t k = 0; k < n; ++k) c.filters.push_back(random_matrix(d, c.window, rng));
  c.bias = random_vector(n, rng);
  c.input = Matrix(T, d);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t r = 0; r < d; ++r) c.input(t, r) = c.sentence(r, t);
  c.weights = Matrix(n, c.window * d);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < c.window; ++j)
      for (std::size_t r = 0; r < d; ++r) c.weights(k, j * d + r) = c.filters[k](r, j);
  return c;
}

// Row maxima with the first maximal column.
inline std::pair<std::vector<double>, std::vector<std::size_t>> oracle_max_pool(const Matrix& m) {
  std::vector<double> values(m.rows());
  std::vector<std::size_t> argmax(m.rows());
  for (std::size_t k = 0; k < m.rows(); ++k) {
    std::size_t best = 0;
    for (std::size_t t = 1; t < m.cols(); ++t) {
      if (m(k, t) > m(k, best)) best = t;
    }
    argmax[k] = best;
    values[k] = m(k, best);
  }
  return {values, argmax};
}

// Ranking loss with gamma 2, m+ 2.5 and m- 0.5. Scans every non-gold
// directed label for the competitor; gold Other keeps only the second term.
inline double oracle_ranking_loss(const std::vector<double>& s, std::size_t gold) {
  const double gamma = 2.0, m_plus = 2.5, m_minus = 0.5;
  double best = -INFINITY;
  for (std::size_t k = 0; k < kNumDirectedLabels; ++k) {
    if (k != gold && s[k] > best) best = s[k];
  }
  double loss = 0.0;
  if (gold != kOtherId) loss += std::log(1.0 + std::exp(gamma * (m_plus - s[gold])));
  loss += std::log(1.0 + std::exp(gamma * (m_minus + best)));
  return loss;
}

using Vec = std::vector<double>;

inline double oracle_capped_relu(double v, double cap) { return std::min(std::max(v, 0.0), cap); }

// f(U x + W h) with each product summed left to right.
inline Vec oracle_rnn_step(const Matrix& u, const Vec& x, const Matrix& w, const Vec& h,
                           double cap) {
  Vec out(u.rows());
  for (std::size_t i = 0; i < u.rows(); ++i) {
    double ux = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) ux += u(i, j) * x[j];
    double wh = 0.0;
    for (std::size_t j = 0; j < h.size(); ++j) wh += w(i, j) * h[j];
    out[i] = oracle_capped_relu(ux + wh, cap);
  }
  return out;
}

struct RnnOracleStates {
  std::vector<Vec> hf, hb, h;  // index 1..n; 0 and n+1 hold zero states
  Vec scores;
};

// The three recurrences unrolled with 1-based time indices:
//   hf_t = f(Uf x_t + V hf_{t-1}),  hb_t = f(Ub x_{n-t+1} + B hb_{t+1}),
//   h_t  = f(hb_t + hf_t + H h_{t-1}),  scores = W rep + b.
inline RnnOracleStates oracle_rnn_forward(const RnnModel& m, const Matrix& x) {
  const ParameterSet& p = m.params();
  const std::size_t n = x.rows();
  const std::size_t hd = m.config().hidden;
  const double cap = m.config().relu_cap;
  auto xt = [&](std::size_t t) {
    auto r = x.row(t - 1);
    return Vec(r.begin(), r.end());
  };
  RnnOracleStates o;
  o.hf.assign(n + 2, Vec(hd, 0.0));
  o.hb.assign(n + 2, Vec(hd, 0.0));
  o.h.assign(n + 2, Vec(hd, 0.0));
  for (std::size_t t = 1; t <= n; ++t) {
    o.hf[t] = oracle_rnn_step(p.value("forward.input"), xt(t), p.value("forward.recurrent"),
                              o.hf[t - 1], cap);
  }
  Vec rep = o.hf[n];
  if (m.config().variant != RnnVariant::kUni) {
    for (std::size_t t = n; t >= 1; --t) {
      o.hb[t] = oracle_rnn_step(p.value("backward.input"), xt(n - t + 1),
                                p.value("backward.recurrent"), o.hb[t + 1], cap);
    }
  }
  if (m.config().variant == RnnVariant::kBi) {
    for (std::size_t i = 0; i < hd; ++i) rep[i] = oracle_capped_relu(o.hb[n][i] + o.hf[n][i], cap);
  } else if (m.config().variant == RnnVariant::kConnectionist) {
    const Matrix& hm = p.value("combined.recurrent");
    for (std::size_t t = 1; t <= n; ++t) {
      for (std::size_t i = 0; i < hd; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < hd; ++j) acc += hm(i, j) * o.h[t - 1][j];
        o.h[t][i] = oracle_capped_relu(o.hb[t][i] + o.hf[t][i] + acc, cap);
      }
    }
    rep = o.h[n];
  }
  const Matrix& w = p.value("scorer.weights");
  const Matrix& b = p.value("scorer.bias");
  o.scores.resize(w.rows());
  for (std::size_t k = 0; k < w.rows(); ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < hd; ++j) acc += w(k, j) * rep[j];
    o.scores[k] = acc + b(0, k);
  }
  return o;
}

// Redraws every non-embedding parameter uniformly in [-scale, scale], wide
// enough for both ends of the capped ReLU to bind.
template <typename Model>
void widen_parameters(Model& m, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (Parameter& p : m.mutable_params()) {
    if (p.kind == ParamKind::kEmbedding) continue;
    for (double& v : p.value.data()) v = dist(rng);
  }
}

}  // namespace relclass::testing

#endif  // RELCLASS_TESTS_ORACLES_H_
