#ifndef RELCLASS_CNN_MODEL_H_
#define RELCLASS_CNN_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "relclass/features.h"
#include "relclass/model.h"
#include "relclass/numerics.h"

namespace relclass {

enum class ContextMode { kMiddleOnly, kExtended };

const char* to_string(ContextMode m);
ContextMode context_mode_from_string(const std::string& s);

struct CnnConfig {
  ContextMode context_mode = ContextMode::kExtended;
  std::vector<std::size_t> window_sizes = {2, 3, 4, 5};
  std::size_t feature_maps_per_window = 300;
  std::size_t word_dim = 50;
  PositionFeatureConfig position;  // embeddings, pos_dim 5, clip 30
  Objective objective = Objective::kRanking;

  void validate() const;
  std::size_t max_window() const;
  std::size_t stacks() const { return context_mode == ContextMode::kExtended ? 2 : 1; }
  std::size_t representation_width() const {
    return window_sizes.size() * feature_maps_per_window * stacks();
  }

  ConfigMap to_map() const;
  static CnnConfig from_map(const ConfigMap& m);
};

// Convolution + max-over-time pooling classifier. Middle-only mode runs one
// stack over the middle context; extended mode runs two independent stacks
// over left+e1+middle and middle+e2+right and concatenates the pooled
// vectors. The pooled representation passes through tanh before the linear
// scoring layer.
class CnnModel : public RelationModel {
 public:
  struct StackCache {
    EncodedInput input;
    std::vector<Matrix> feature_maps;  // one per window size
    std::vector<std::vector<std::size_t>> argmax;
  };
  struct Cache {
    std::uint64_t version = 0;
    std::vector<StackCache> stacks;
    std::vector<double> pooled;          // before tanh
    std::vector<double> representation;  // after tanh
    std::vector<double> scores;
  };

  // Fresh model: filters and scorer uniform in [-0.1, 0.1], biases zero.
  CnnModel(CnnConfig config, Vocabulary vocab, std::mt19937_64& rng,
           const PretrainedEmbeddings* pretrained = nullptr);
  // Restores a model from stored parameters.
  CnnModel(CnnConfig config, Vocabulary vocab, ParameterSet params);

  CnnModel(const CnnModel& other);
  CnnModel& operator=(const CnnModel&) = delete;

  const CnnConfig& config() const { return config_; }
  const FeatureSpace& space() const { return space_; }

  std::string family() const override { return "cnn"; }
  Objective objective() const override { return config_.objective; }
  ConfigMap config_map() const override { return config_.to_map(); }
  const Vocabulary& vocab() const override { return *vocab_; }
  const ParameterSet& params() const override { return params_; }
  ParameterSet& mutable_params() override {
    ++version_;
    return params_;
  }

  // One encoded matrix per stack.
  std::vector<EncodedInput> encode(const LabeledSentence& sentence) const;

  std::vector<double> forward(const LabeledSentence& sentence, Cache* cache = nullptr) const;
  // Runs the stacks on pre-encoded inputs (one per stack).
  std::vector<double> forward_encoded(std::vector<EncodedInput> inputs,
                                      Cache* cache = nullptr) const;
  // Adds the gradient of <dscores, scores> into `grads`, including the
  // embedding rows read by the forward pass. Throws StaleCacheError when the
  // parameters were handed out for mutation after the forward pass.
  void backward(const Cache& cache, std::span<const double> dscores, GradientSet& grads,
                double scale = 1.0) const;

  std::vector<double> score(const LabeledSentence& sentence) const override {
    return forward(sentence);
  }
  double accumulate_gradient(const LabeledSentence& sentence, const LossFn& loss,
                             GradientSet& grads, double scale = 1.0) const override;

  // Parameter indices of stack s, window slot w.
  std::size_t filter_index(std::size_t stack, std::size_t window_slot) const;
  std::size_t filter_bias_index(std::size_t stack, std::size_t window_slot) const;
  std::size_t scorer_index() const { return scorer_; }
  std::size_t scorer_bias_index() const { return scorer_bias_; }

 private:
  void add_layers(std::mt19937_64* rng);
  void bind_layers();

  CnnConfig config_;
  std::shared_ptr<const Vocabulary> vocab_;
  ParameterSet params_;
  FeatureSpace space_;
  std::vector<std::size_t> filters_;  // stack-major
  std::vector<std::size_t> filter_biases_;
  std::size_t scorer_ = 0;
  std::size_t scorer_bias_ = 0;
  std::uint64_t version_ = 0;
};

}  // namespace relclass

#endif  // RELCLASS_CNN_MODEL_H_
