#ifndef RELCLASS_RNN_MODEL_H_
#define RELCLASS_RNN_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "relclass/features.h"
#include "relclass/model.h"

namespace relclass {

enum class RnnVariant { kUni, kBi, kConnectionist };

const char* to_string(RnnVariant v);
RnnVariant rnn_variant_from_string(const std::string& s);

struct RnnConfig {
  RnnVariant variant = RnnVariant::kConnectionist;
  PositionFeatureConfig position{PositionVariant::kIndicators, 5, 30};
  std::size_t word_dim = 50;
  std::size_t hidden = 400;
  Objective objective = Objective::kRanking;
  double relu_cap = 1.0;
  // Number of recurrent steps gradients travel back through; 0 unrolls the
  // whole sentence.
  std::size_t bptt_truncation = 0;

  void validate() const;
  ConfigMap to_map() const;
  static RnnConfig from_map(const ConfigMap& m);
};

// Sentence-level recurrent classifier over trigram inputs x_1..x_n, with f the
// capped ReLU and all initial states zero:
//
//   forward   hf_t = f(Uf x_t + V hf_{t-1})                t = 1..n
//   backward  hb_t = f(Ub x_{n-t+1} + B hb_{t+1})          t = n..1
//   combined  h_t  = f(hb_t + hf_t + H h_{t-1})            t = 1..n
//
// Only the final state is scored: hf_n (uni), f(hb_n + hf_n) (bi) or h_n
// (connectionist). The backward recurrence runs t = n..1 reading x_{n-t+1},
// so hb_t equals the state after n-t+1 steps of a forward-style scan over
// x_1, x_2, ... with (Ub, B).
class RnnModel : public RelationModel {
 public:
  struct Cache {
    std::uint64_t version = 0;
    EncodedInput input;
    // Pre-activations and states, index 0..n-1 for t = 1..n.
    std::vector<std::vector<double>> fwd_pre, fwd;
    // Backward pass in scan order: scan[s] is hb_{n-s}.
    std::vector<std::vector<double>> bwd_pre, bwd;
    std::vector<std::vector<double>> comb_pre, comb;
    std::vector<double> representation;
    std::vector<double> scores;
  };

  // Recurrences and scorer uniform in [-0.1, 0.1]; scorer bias zero.
  RnnModel(RnnConfig config, Vocabulary vocab, std::mt19937_64& rng,
           const PretrainedEmbeddings* pretrained = nullptr);
  RnnModel(RnnConfig config, Vocabulary vocab, ParameterSet params);
  RnnModel(const RnnModel& other);
  RnnModel& operator=(const RnnModel&) = delete;

  const RnnConfig& config() const { return config_; }
  const FeatureSpace& space() const { return space_; }
  std::size_t input_width() const { return 3 * space_.token_width(); }

  std::string family() const override { return "rnn"; }
  Objective objective() const override { return config_.objective; }
  ConfigMap config_map() const override { return config_.to_map(); }
  const Vocabulary& vocab() const override { return *vocab_; }
  const ParameterSet& params() const override { return params_; }
  ParameterSet& mutable_params() override {
    ++version_;
    return params_;
  }

  EncodedInput encode(const LabeledSentence& sentence) const;
  std::vector<double> forward(const LabeledSentence& sentence, Cache* cache = nullptr) const;
  std::vector<double> forward_encoded(EncodedInput input, Cache* cache = nullptr) const;
  // Full BPTT through all three recurrences. Throws StaleCacheError on a
  // cache from before the last mutable_params() call.
  void backward(const Cache& cache, std::span<const double> dscores, GradientSet& grads,
                double scale = 1.0) const;

  std::vector<double> score(const LabeledSentence& sentence) const override {
    return forward(sentence);
  }
  double accumulate_gradient(const LabeledSentence& sentence, const LossFn& loss,
                             GradientSet& grads, double scale = 1.0) const override;

  // Parameter indices; absent matrices (by variant) are std::nullopt.
  std::size_t forward_input_index() const { return fwd_in_; }
  std::size_t forward_recurrent_index() const { return fwd_rec_; }
  std::optional<std::size_t> backward_input_index() const { return bwd_in_; }
  std::optional<std::size_t> backward_recurrent_index() const { return bwd_rec_; }
  std::optional<std::size_t> combined_recurrent_index() const { return comb_rec_; }
  std::size_t scorer_index() const { return scorer_; }
  std::size_t scorer_bias_index() const { return scorer_bias_; }

 private:
  void add_layers(std::mt19937_64& rng);
  void bind_layers();
  // Scan x_1..x_n with (input, recurrent); fills pre-activations and states.
  void scan(const Matrix& x, std::size_t input, std::size_t recurrent,
            std::vector<std::vector<double>>& pre, std::vector<std::vector<double>>& out) const;
  // Reverse sweep of one scan given dL/d(state) per step; accumulates into
  // the input/recurrent gradients and dx.
  void scan_backward(const Matrix& x, std::size_t input, std::size_t recurrent,
                     const std::vector<std::vector<double>>& pre,
                     const std::vector<std::vector<double>>& out,
                     std::vector<std::vector<double>> dstate, GradientSet& grads,
                     Matrix& dx) const;

  RnnConfig config_;
  std::shared_ptr<const Vocabulary> vocab_;
  ParameterSet params_;
  FeatureSpace space_;
  std::size_t fwd_in_ = 0, fwd_rec_ = 0;
  std::optional<std::size_t> bwd_in_, bwd_rec_, comb_rec_;
  std::size_t scorer_ = 0, scorer_bias_ = 0;
  std::uint64_t version_ = 0;
};

}  // namespace relclass

#endif  // RELCLASS_RNN_MODEL_H_
