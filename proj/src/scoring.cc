#include "relclass/scoring.h"

#include <cmath>
#include <stdexcept>

#include "relclass/tensor.h"

namespace relclass {

const char* to_string(Objective o) {
  return o == Objective::kRanking ? "ranking" : "softmax";
}

Objective objective_from_string(const std::string& s) {
  if (s == "ranking") return Objective::kRanking;
  if (s == "softmax") return Objective::kSoftmax;
  throw std::invalid_argument("unknown objective '" + s + "'");
}

std::size_t argmax(std::span<const double> v) {
  if (v.empty()) throw ShapeError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

RelationLabel predict_label(std::span<const double> scores, Objective objective) {
  require_shape(scores.size() == num_scores(objective),
                "expected " + std::to_string(num_scores(objective)) + " scores, got " +
                    std::to_string(scores.size()));
  if (!all_finite(scores)) throw NumericError("non-finite scores");
  const std::size_t best = argmax(scores);
  if (objective == Objective::kRanking && scores[best] < 0.0) return RelationLabel::other();
  return RelationLabel::from_id(best);
}

}  // namespace relclass
