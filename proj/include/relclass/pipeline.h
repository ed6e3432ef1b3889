#ifndef RELCLASS_PIPELINE_H_
#define RELCLASS_PIPELINE_H_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "relclass/corpus.h"
#include "relclass/features.h"
#include "relclass/gradcheck.h"
#include "relclass/model.h"
#include "relclass/run_config.h"
#include "relclass/training.h"

namespace relclass {

// Files written into a run directory.
inline constexpr const char* kCheckpointFile = "checkpoint.bin";
inline constexpr const char* kManifestFile = "manifest.txt";
inline constexpr const char* kEpochLogFile = "epochs.log";
inline constexpr const char* kDevSplitFile = "dev.cache";

// Fresh model for the run's architecture. The vocabulary is built from
// `train` (plus pretrained tokens and position indicators as configured).
std::unique_ptr<RelationModel> build_model(const RunConfig& rc,
                                           std::span<const LabeledSentence> train,
                                           const PretrainedEmbeddings* pretrained);

struct RunData {
  std::vector<LabeledSentence> train;
  std::vector<LabeledSentence> dev;
};

// Reads the training file (falling back to the data directory), then takes
// the dev set from dev_file or a seeded dev_size split, then applies
// train_limit as a seeded subsample. Throws ParseError on bad data and
// std::invalid_argument when no training file is configured.
RunData load_run_data(const RunConfig& rc);

struct TrainingRun {
  TrainResult result;
  std::unique_ptr<RelationModel> model;
  std::size_t vocab_size = 0;
  std::size_t train_sentences = 0;
  std::size_t dev_sentences = 0;
  // Macro-F1 of the final model on the dev split; -1 without dev.
  double final_dev_f1 = -1.0;
  double wall_seconds = 0.0;
};

// Full training run. When out_dir is non-empty the run files above are
// written there, with the checkpoint rewritten after every epoch. Progress
// lines go to `log` when given.
TrainingRun run_training(const RunConfig& rc, const RunData& data, const std::string& out_dir,
                         std::ostream* log = nullptr);

// Manifest text: the resolved settings, vocabulary size, per-epoch metrics,
// final dev F1 and wall time as key = value lines.
std::string format_manifest(const RunConfig& rc, const TrainingRun& run);

// Random SemEval-like sentences over tokens w0..w{word_types-1}, with
// lengths in [min_len, max_len], random entity spans and labels.
std::vector<LabeledSentence> make_toy_corpus(std::size_t n, std::size_t word_types,
                                             std::size_t min_len, std::size_t max_len,
                                             std::mt19937_64& rng);

// The same architecture and feature choices at gradient-check size: word
// dim 8, hidden 16, at most 4 feature maps per window, position dim at most
// 4 and position clip 4.
RunConfig toy_run_config(const RunConfig& rc);

// Builds a toy model and corpus (vocabulary of about 50 types, sentence
// lengths 3 to 8) from `seed` and checks the summed loss over `sentences`
// examples. With flip_conv_sign the analytic gradient of the first filter
// bank is negated before the comparison (CNN only), which the check must
// report.
GradCheckReport toy_gradient_check(const RunConfig& rc, std::uint64_t seed,
                                   std::size_t sentences = 4, bool flip_conv_sign = false,
                                   const GradCheckOptions& options = {});

}  // namespace relclass

#endif  // RELCLASS_PIPELINE_H_
