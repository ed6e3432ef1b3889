#ifndef RELCLASS_MODEL_H_
#define RELCLASS_MODEL_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "relclass/corpus.h"
#include "relclass/parameters.h"
#include "relclass/scoring.h"

namespace relclass {

// Flat key/value settings; the config block of checkpoints and manifests.
using ConfigMap = std::map<std::string, std::string>;

// Raised when a backward pass is handed a cache from an older forward pass.
class StaleCacheError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct LossResult {
  double loss = 0.0;
  std::vector<double> dscores;
};

// Maps a score vector to the loss and its gradient for one example.
using LossFn = std::function<LossResult(std::span<const double> scores,
                                        const LabeledSentence& sentence)>;

// Common surface of the CNN and RNN classifiers used by training,
// prediction and checkpointing.
class RelationModel {
 public:
  virtual ~RelationModel() = default;

  // "cnn" or "rnn".
  virtual std::string family() const = 0;
  virtual Objective objective() const = 0;
  virtual ConfigMap config_map() const = 0;

  virtual const Vocabulary& vocab() const = 0;
  virtual const ParameterSet& params() const = 0;
  // Any later backward pass must come from a fresh forward pass.
  virtual ParameterSet& mutable_params() = 0;

  virtual std::vector<double> score(const LabeledSentence& sentence) const = 0;

  // Forward, loss, backward for one sentence. Gradients are added into
  // `grads` multiplied by `scale`. Returns the loss.
  virtual double accumulate_gradient(const LabeledSentence& sentence, const LossFn& loss,
                                     GradientSet& grads, double scale = 1.0) const = 0;

  RelationLabel predict(const LabeledSentence& sentence) const {
    return predict_label(score(sentence), objective());
  }
};

}  // namespace relclass

#endif  // RELCLASS_MODEL_H_
