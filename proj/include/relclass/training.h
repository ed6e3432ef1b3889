#ifndef RELCLASS_TRAINING_H_
#define RELCLASS_TRAINING_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "relclass/corpus.h"
#include "relclass/evaluation.h"
#include "relclass/model.h"

namespace relclass {

struct RankingLossConfig {
  double gamma = 2.0;
  double m_plus = 2.5;
  double m_minus = 0.5;
};

// Pairwise ranking loss over the 18 directed-label scores:
//   L = log(1 + exp(gamma (m+ - s_gold))) + log(1 + exp(gamma (m- + s_c)))
// where c is the best-scoring label other than gold. For gold Other only the
// second term is used, with c the overall best label. dscores is nonzero at
// no more than the two labels involved. Ties pick the lowest label id.
LossResult ranking_loss(std::span<const double> scores, const RelationLabel& gold,
                        const RankingLossConfig& config = {});

// -log p_gold with p clamped below at 1e-12. dscores = p - onehot(gold) is the
// gradient with respect to the logits that produced p.
LossResult cross_entropy_loss(std::span<const double> probabilities, std::size_t gold);

// Softmax followed by cross entropy, for raw scores over all 19 labels.
LossResult softmax_cross_entropy(std::span<const double> scores, const RelationLabel& gold);

LossFn make_loss(Objective objective, const RankingLossConfig& ranking = {});

// theta <- theta - lr * (g + l2 * theta). L2 applies to ParamKind::kWeight
// only; embeddings get row-sparse updates and frozen rows never move. Throws
// NumericError if any updated value is not finite (parameters are left
// untouched in that case).
void sgd_step(ParameterSet& params, const GradientSet& grads, double lr, double l2_weight);

enum class LrSchedule { kConstant, kHalveOnPlateau };
const char* to_string(LrSchedule s);
LrSchedule lr_schedule_from_string(const std::string& s);

struct TrainConfig {
  Objective objective = Objective::kRanking;
  RankingLossConfig ranking;
  double l2_weight = 1e-4;
  std::size_t batch_size = 25;
  double learning_rate = 0.2;
  std::size_t epochs = 10;
  bool clip = false;
  double clip_threshold = 10.0;
  std::uint64_t seed = 1;
  // kHalveOnPlateau halves the rate after every epoch whose dev F1 does not
  // beat the best so far. Without a dev set the rate stays constant.
  LrSchedule schedule = LrSchedule::kHalveOnPlateau;
  // Also score the training set after every epoch.
  bool log_train_accuracy = false;

  static TrainConfig cnn_defaults();
  static TrainConfig rnn_defaults();
  void validate() const;
  ConfigMap to_map() const;
  // Reads the keys written by to_map(); missing keys keep their defaults.
  static TrainConfig from_map(const ConfigMap& m, TrainConfig defaults);
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double learning_rate = 0.0;
  double train_loss = 0.0;  // mean data loss
  double train_accuracy = -1.0;  // percent; -1 when not logged
  double dev_f1 = -1.0;          // -1 without dev set
};

struct TrainResult {
  std::vector<EpochLog> epochs;
  bool diverged = false;
  std::string error;
};

// Called after each completed epoch; the CLI writes its checkpoint here.
using EpochCallback = std::function<void(const EpochLog&, const RelationModel&)>;

std::vector<PredictionRecord> predict_all(const RelationModel& model,
                                          std::span<const LabeledSentence> sentences,
                                          bool keep_scores = false);

// Seeded per-epoch shuffling, minibatches of batch_size (gradients averaged
// over the batch), optional clipping, SGD with L2, dev macro-F1 per epoch.
// Stops early only on divergence, which is reported in the result; the model
// then holds the parameters from the end of the last good epoch.
TrainResult train(RelationModel& model, std::span<const LabeledSentence> train_set,
                  std::span<const LabeledSentence> dev_set, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

}  // namespace relclass

#endif  // RELCLASS_TRAINING_H_
