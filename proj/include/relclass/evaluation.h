#ifndef RELCLASS_EVALUATION_H_
#define RELCLASS_EVALUATION_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "relclass/corpus.h"
#include "relclass/labels.h"

namespace relclass {

struct PredictionRecord {
  std::int64_t id = 0;
  RelationLabel label;
  std::vector<double> scores;  // optional

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

struct FamilyScore {
  std::size_t gold = 0;       // gold sentences in the family, either direction
  std::size_t predicted = 0;  // predictions in the family, either direction
  std::size_t correct = 0;    // exact directed matches
  double precision = 0.0;     // percent
  double recall = 0.0;
  double f1 = 0.0;

  bool present() const { return gold > 0 || predicted > 0; }
};

struct EvalReport {
  std::array<FamilyScore, kNumFamilies> families{};
  // Mean F1 over the families present in gold or predictions; Other never
  // contributes. 100 when no family is present at all.
  double macro_f1 = 0.0;
  double accuracy = 0.0;  // percent, exact 19-way match
  std::size_t sentences = 0;
  // confusion[gold id][predicted id]
  std::array<std::array<std::size_t, kNumLabels>, kNumLabels> confusion{};
};

// Thrown when gold and predictions do not cover the same ids.
class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Official SemEval 2010 Task 8 semantics (9+1 way, direction taken into
// account). Inputs are aligned by position.
EvalReport macro_f1(std::span<const RelationLabel> gold, std::span<const RelationLabel> predicted);
// Aligns by sentence id; throws AlignmentError on a mismatch.
EvalReport macro_f1(std::span<const LabeledSentence> gold,
                    std::span<const PredictionRecord> predictions);

struct ZTestResult {
  std::size_t n = 0;
  double accuracy_a = 0.0;  // fractions
  double accuracy_b = 0.0;
  double z = 0.0;
  double p_value = 1.0;  // two-tailed
};

// Two-proportion z-test with pooled variance on per-sentence exact-match
// correctness of systems A and B.
ZTestResult significance_z_test(std::span<const PredictionRecord> a,
                                std::span<const PredictionRecord> b,
                                std::span<const LabeledSentence> gold);

// Two-tailed p-value of a standard normal statistic.
double two_tailed_p(double z);

// Per-sentence plurality vote; ties are broken by a seeded uniform choice
// among the tied labels. All sets must list the same ids in the same order.
std::vector<PredictionRecord> ensemble_vote(
    std::span<const std::vector<PredictionRecord>> prediction_sets, std::uint64_t seed);

// "id \t label" lines with official label spelling.
std::string format_predictions(std::span<const PredictionRecord> predictions);
std::vector<PredictionRecord> parse_predictions(std::string_view text);
std::vector<PredictionRecord> read_prediction_file(const std::string& path);
void write_prediction_file(const std::string& path,
                           std::span<const PredictionRecord> predictions);

// Aligned per-family table followed by a key = value block.
void print_report(std::ostream& os, const EvalReport& report);

}  // namespace relclass

#endif  // RELCLASS_EVALUATION_H_
