#include "relclass/training.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "relclass/config_map.h"
#include "relclass/numerics.h"

namespace relclass {

LossResult ranking_loss(std::span<const double> scores, const RelationLabel& gold,
                        const RankingLossConfig& config) {
  require_shape(scores.size() == kNumDirectedLabels,
                "ranking loss expects " + std::to_string(kNumDirectedLabels) + " scores");
  const std::size_t gold_id = gold.id();
  if (gold_id > kOtherId) throw std::out_of_range("gold label out of range");
  const double g = config.gamma;

  // Best competitor: highest score among labels other than gold.
  std::size_t competitor = kNumDirectedLabels;
  for (std::size_t k = 0; k < kNumDirectedLabels; ++k) {
    if (k == gold_id) continue;
    if (competitor == kNumDirectedLabels || scores[k] > scores[competitor]) competitor = k;
  }

  LossResult r;
  r.dscores.assign(scores.size(), 0.0);
  if (!gold.is_other()) {
    const double z = g * (config.m_plus - scores[gold_id]);
    r.loss += softplus(z);
    r.dscores[gold_id] = -g * sigmoid(z);
  }
  const double z = g * (config.m_minus + scores[competitor]);
  r.loss += softplus(z);
  r.dscores[competitor] = g * sigmoid(z);
  return r;
}

LossResult cross_entropy_loss(std::span<const double> probabilities, std::size_t gold) {
  require_shape(gold < probabilities.size(), "gold label out of range");
  LossResult r;
  r.loss = -std::log(std::max(probabilities[gold], 1e-12));
  r.dscores.assign(probabilities.begin(), probabilities.end());
  r.dscores[gold] -= 1.0;
  return r;
}

LossResult softmax_cross_entropy(std::span<const double> scores, const RelationLabel& gold) {
  require_shape(scores.size() == kNumLabels,
                "softmax loss expects " + std::to_string(kNumLabels) + " scores");
  return cross_entropy_loss(softmax(scores), gold.id());
}

LossFn make_loss(Objective objective, const RankingLossConfig& ranking) {
  if (objective == Objective::kRanking) {
    return [ranking](std::span<const double> scores, const LabeledSentence& s) {
      return ranking_loss(scores, s.label, ranking);
    };
  }
  return [](std::span<const double> scores, const LabeledSentence& s) {
    return softmax_cross_entropy(scores, s.label);
  };
}

void sgd_step(ParameterSet& params, const GradientSet& grads, double lr, double l2_weight) {
  require_shape(grads.size() == params.size(), "sgd step: gradient/parameter count mismatch");
  auto updated = [&](const Parameter& p, double theta, double g) {
    const double decay = p.kind == ParamKind::kWeight ? l2_weight * theta : 0.0;
    return theta - lr * (g + decay);
  };
  // Validate first so a bad step leaves the parameters as they were.
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Parameter& p = params[i];
    if (grads.is_sparse(i)) {
      for (const auto& [r, g] : grads.rows(i)) {
        if (p.is_frozen_row(r)) continue;
        auto row = p.value.row(r);
        for (std::size_t c = 0; c < g.size(); ++c) {
          if (!std::isfinite(updated(p, row[c], g[c]))) {
            throw NumericError("non-finite update in " + p.name + " row " + std::to_string(r));
          }
        }
      }
    } else {
      const auto& theta = p.value.data();
      const auto& g = grads.dense(i).data();
      require_shape(theta.size() == g.size(), "sgd step: shape mismatch for " + p.name);
      for (std::size_t k = 0; k < theta.size(); ++k) {
        if (!std::isfinite(updated(p, theta[k], g[k]))) {
          throw NumericError("non-finite update in " + p.name);
        }
      }
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    if (grads.is_sparse(i)) {
      for (const auto& [r, g] : grads.rows(i)) {
        if (p.is_frozen_row(r)) continue;
        auto row = p.value.row(r);
        for (std::size_t c = 0; c < g.size(); ++c) row[c] = updated(p, row[c], g[c]);
      }
    } else {
      auto& theta = p.value.data();
      const auto& g = grads.dense(i).data();
      for (std::size_t k = 0; k < theta.size(); ++k) theta[k] = updated(p, theta[k], g[k]);
    }
  }
}

const char* to_string(LrSchedule s) {
  return s == LrSchedule::kHalveOnPlateau ? "halve-on-plateau" : "constant";
}

LrSchedule lr_schedule_from_string(const std::string& s) {
  if (s == "halve-on-plateau") return LrSchedule::kHalveOnPlateau;
  if (s == "constant") return LrSchedule::kConstant;
  throw std::invalid_argument("unknown learning-rate schedule '" + s + "'");
}

TrainConfig TrainConfig::cnn_defaults() {
  TrainConfig c;
  c.batch_size = 25;
  c.learning_rate = 0.2;
  c.epochs = 10;
  c.clip = false;
  return c;
}

TrainConfig TrainConfig::rnn_defaults() {
  TrainConfig c;
  c.batch_size = 1;
  c.learning_rate = 0.01;
  c.epochs = 50;
  c.clip = true;
  return c;
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (epochs == 0) throw std::invalid_argument("epochs must be positive");
  if (l2_weight < 0.0) throw std::invalid_argument("l2 weight must be non-negative");
  if (!(clip_threshold > 0.0)) throw std::invalid_argument("clip threshold must be positive");
  if (!(ranking.gamma > 0.0)) throw std::invalid_argument("ranking gamma must be positive");
}

ConfigMap TrainConfig::to_map() const {
  return {
      {"objective", to_string(objective)},
      {"ranking_gamma", format_double(ranking.gamma)},
      {"ranking_m_plus", format_double(ranking.m_plus)},
      {"ranking_m_minus", format_double(ranking.m_minus)},
      {"l2_weight", format_double(l2_weight)},
      {"batch_size", std::to_string(batch_size)},
      {"learning_rate", format_double(learning_rate)},
      {"epochs", std::to_string(epochs)},
      {"clip", clip ? "true" : "false"},
      {"clip_threshold", format_double(clip_threshold)},
      {"seed", std::to_string(seed)},
      {"lr_schedule", to_string(schedule)},
      {"log_train_accuracy", log_train_accuracy ? "true" : "false"},
  };
}

TrainConfig TrainConfig::from_map(const ConfigMap& m, TrainConfig c) {
  auto has = [&](const char* k) { return m.count(k) > 0; };
  if (has("objective")) c.objective = objective_from_string(m.at("objective"));
  if (has("ranking_gamma")) c.ranking.gamma = get_double(m, "ranking_gamma");
  if (has("ranking_m_plus")) c.ranking.m_plus = get_double(m, "ranking_m_plus");
  if (has("ranking_m_minus")) c.ranking.m_minus = get_double(m, "ranking_m_minus");
  if (has("l2_weight")) c.l2_weight = get_double(m, "l2_weight");
  if (has("batch_size")) c.batch_size = get_size(m, "batch_size");
  if (has("learning_rate")) c.learning_rate = get_double(m, "learning_rate");
  if (has("epochs")) c.epochs = get_size(m, "epochs");
  if (has("clip")) c.clip = get_bool(m, "clip");
  if (has("clip_threshold")) c.clip_threshold = get_double(m, "clip_threshold");
  if (has("seed")) c.seed = get_u64(m, "seed");
  if (has("lr_schedule")) c.schedule = lr_schedule_from_string(m.at("lr_schedule"));
  if (has("log_train_accuracy")) c.log_train_accuracy = get_bool(m, "log_train_accuracy");
  c.validate();
  return c;
}

std::vector<PredictionRecord> predict_all(const RelationModel& model,
                                          std::span<const LabeledSentence> sentences,
                                          bool keep_scores) {
  std::vector<PredictionRecord> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) {
    PredictionRecord p;
    p.id = s.id;
    auto scores = model.score(s);
    p.label = predict_label(scores, model.objective());
    if (keep_scores) p.scores = std::move(scores);
    out.push_back(std::move(p));
  }
  return out;
}

TrainResult train(RelationModel& model, std::span<const LabeledSentence> train_set,
                  std::span<const LabeledSentence> dev_set, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw std::invalid_argument("training set is empty");
  if (config.objective != model.objective()) {
    throw std::invalid_argument("training objective does not match the model's objective");
  }
  const LossFn loss = make_loss(config.objective, config.ranking);
  // Independent of the stream used for parameter initialization.
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  double lr = config.learning_rate;
  double best_dev = -1.0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const ParameterSet snapshot = model.params();
    std::shuffle(order.begin(), order.end(), rng);
    EpochLog log;
    log.epoch = epoch;
    log.learning_rate = lr;
    double loss_sum = 0.0;
    try {
      GradientSet grads(model.params());
      for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        const std::size_t end = std::min(order.size(), start + config.batch_size);
        const double scale = 1.0 / static_cast<double>(end - start);
        grads.clear();
        for (std::size_t k = start; k < end; ++k) {
          const double l = model.accumulate_gradient(train_set[order[k]], loss, grads, scale);
          if (!std::isfinite(l)) throw NumericError("loss is not finite");
          loss_sum += l;
        }
        if (!grads.all_finite()) throw NumericError("gradient is not finite");
        if (config.clip) clip_gradients(grads, config.clip_threshold);
        sgd_step(model.mutable_params(), grads, lr, config.l2_weight);
      }
    } catch (const NumericError& e) {
      model.mutable_params() = snapshot;
      result.diverged = true;
      result.error = "epoch " + std::to_string(epoch) + ": " + e.what();
      return result;
    }
    log.train_loss = loss_sum / static_cast<double>(order.size());
    if (config.log_train_accuracy) {
      log.train_accuracy = macro_f1(train_set, predict_all(model, train_set)).accuracy;
    }
    if (!dev_set.empty()) {
      log.dev_f1 = macro_f1(dev_set, predict_all(model, dev_set)).macro_f1;
      if (config.schedule == LrSchedule::kHalveOnPlateau) {
        if (log.dev_f1 > best_dev) {
          best_dev = log.dev_f1;
        } else {
          lr *= 0.5;
        }
      }
    }
    result.epochs.push_back(log);
    if (on_epoch) on_epoch(log, model);
  }
  return result;
}

}  // namespace relclass
