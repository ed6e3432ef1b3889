#ifndef RELCLASS_SCORING_H_
#define RELCLASS_SCORING_H_

#include <cstddef>
#include <span>
#include <string>

#include "relclass/labels.h"

namespace relclass {

// Softmax scores all 19 labels. Ranking scores only the 18 directed labels;
// Other is what remains when no directed label scores above zero.
enum class Objective { kSoftmax, kRanking };

const char* to_string(Objective o);
Objective objective_from_string(const std::string& s);

inline std::size_t num_scores(Objective o) {
  return o == Objective::kRanking ? kNumDirectedLabels : kNumLabels;
}

// Softmax: argmax over the 19 labels. Ranking: argmax over the 18 directed
// labels, Other when that maximum is negative. Ties go to the lowest id.
RelationLabel predict_label(std::span<const double> scores, Objective objective);

// Index of the first maximal entry.
std::size_t argmax(std::span<const double> v);

}  // namespace relclass

#endif  // RELCLASS_SCORING_H_
