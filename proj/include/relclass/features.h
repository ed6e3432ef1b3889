#ifndef RELCLASS_FEATURES_H_
#define RELCLASS_FEATURES_H_

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "relclass/corpus.h"
#include "relclass/parameters.h"
#include "relclass/tensor.h"

namespace relclass {

enum class PositionVariant { kNone, kEmbeddings, kEmbeddingsPlusFlag, kIndicators };

const char* to_string(PositionVariant v);
PositionVariant position_variant_from_string(const std::string& s);

struct PositionFeatureConfig {
  PositionVariant variant = PositionVariant::kEmbeddings;
  std::size_t pos_dim = 5;
  int clip = 30;

  bool uses_embeddings() const {
    return variant == PositionVariant::kEmbeddings ||
           variant == PositionVariant::kEmbeddingsPlusFlag;
  }
  bool uses_flag() const { return variant == PositionVariant::kEmbeddingsPlusFlag; }
  bool uses_indicators() const { return variant == PositionVariant::kIndicators; }
  // Distances -clip..clip plus one bucket for PADDING.
  std::size_t buckets() const { return 2 * static_cast<std::size_t>(clip) + 2; }
  std::size_t padding_bucket() const { return 2 * static_cast<std::size_t>(clip) + 1; }
  std::size_t bucket(int distance) const { return static_cast<std::size_t>(distance + clip); }

  // Throws std::invalid_argument on a bad combination.
  void validate() const;
};

// Token positions of each region. extended_1 = left+e1+middle and
// extended_2 = middle+e2+right.
struct ContextViews {
  std::vector<std::size_t> left, e1, middle, e2, right;
  std::vector<std::size_t> extended_1, extended_2;
};

ContextViews split_contexts(const LabeledSentence& sentence);

// Signed distance of every token to the nearest token of e1 (first) and e2
// (second), 0 inside the span, clipped to [-clip, clip].
std::vector<std::pair<int, int>> relative_positions(const LabeledSentence& sentence,
                                                    int clip);

// Inserts <e1> </e1> <e2> </e2> around the entity spans. The returned spans
// cover the entity tokens, not the indicators.
LabeledSentence insert_position_indicators(const LabeledSentence& sentence);

// 1 on tokens inside either entity, 0 elsewhere.
std::vector<int> entity_flags(const LabeledSentence& sentence);

// Names the embedding tables inside a model's ParameterSet.
struct FeatureSpace {
  const Vocabulary* vocab = nullptr;
  PositionFeatureConfig position;
  std::size_t word_dim = 0;
  std::size_t word_table = 0;
  std::optional<std::size_t> pos1_table;
  std::optional<std::size_t> pos2_table;

  // Width of one token's feature vector.
  std::size_t token_width() const;
};

// Table rows feeding one input column.
struct TokenRef {
  std::size_t word = Vocabulary::kPadding;
  std::size_t pos1 = 0;
  std::size_t pos2 = 0;
  double flag = 0.0;
};

struct EncodedInput {
  // CNN: one row per (padded) column of the sentence matrix, token_width wide.
  // RNN: one row per time step, 3 * token_width wide (trigrams).
  Matrix values;
  // CNN: one ref per row. RNN: n + 2 refs, PADDING at both ends; step t uses
  // refs t, t+1, t+2.
  std::vector<TokenRef> refs;
};

// Adds the word table (and the two position tables when the variant uses
// them) to `params` and returns the resulting FeatureSpace. Word rows are
// uniform in [-0.25, 0.25] unless given by `pretrained`; the PADDING row is
// zero and frozen.
struct PretrainedEmbeddings;
FeatureSpace add_embedding_tables(ParameterSet& params, const Vocabulary& vocab,
                                  std::size_t word_dim, const PositionFeatureConfig& position,
                                  std::mt19937_64& rng,
                                  const PretrainedEmbeddings* pretrained = nullptr);

// Rebinds a FeatureSpace to tables already present in `params` (checkpoint
// loading).
FeatureSpace bind_embedding_tables(const ParameterSet& params, const Vocabulary& vocab,
                                   const PositionFeatureConfig& position);

// CNN input for the tokens at `context` (sentence positions). Each column is
// word ⊕ pos(d1) ⊕ pos(d2), with max_window - 1 PADDING columns on each side.
// Only the embeddings and none variants are accepted.
EncodedInput encode_cnn_input(const LabeledSentence& sentence,
                              std::span<const std::size_t> context, const FeatureSpace& space,
                              const ParameterSet& params, std::size_t max_window);

// RNN trigram sequence. With the indicators variant the indicator tokens are
// inserted first, so the sequence is 4 steps longer than the sentence.
EncodedInput encode_rnn_input(const LabeledSentence& sentence, const FeatureSpace& space,
                              const ParameterSet& params);

// Sends d(values) back to the embedding rows named by the refs.
void scatter_cnn_gradient(const EncodedInput& input, const Matrix& dvalues,
                          const FeatureSpace& space, GradientSet& grads);
void scatter_rnn_gradient(const EncodedInput& input, const Matrix& dvalues,
                          const FeatureSpace& space, GradientSet& grads);

struct PretrainedEmbeddings {
  std::vector<std::string> tokens;
  Matrix vectors;  // tokens.size() x dim

  std::size_t dim() const { return vectors.cols(); }
};

// Text format: one token per line followed by dim floats. A leading
// "<count> <dim>" header is detected and skipped. Tokens are lowercased; the
// first occurrence wins. When `keep` is given, other tokens are dropped while
// reading. Throws ParseError on ragged rows, or when expected_dim is nonzero
// and differs from the file.
PretrainedEmbeddings load_pretrained_embeddings(const std::string& path,
                                                std::size_t expected_dim = 0,
                                                const std::unordered_set<std::string>* keep =
                                                    nullptr);

}  // namespace relclass

#endif  // RELCLASS_FEATURES_H_
