#include "relclass/pipeline.h"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <unordered_set>

#include "relclass/checkpoint.h"
#include "relclass/cnn_model.h"
#include "relclass/config_map.h"
#include "relclass/evaluation.h"
#include "relclass/io.h"
#include "relclass/rnn_model.h"

namespace relclass {
namespace {

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    if (comma > pos) out.push_back(s.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

std::string epoch_key(std::size_t epoch, const char* field) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "epoch.%03zu.%s", epoch, field);
  return buf;
}

std::string format_epoch_line(const EpochLog& e) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "epoch %zu\tlr %.6g\ttrain_loss %.6f\ttrain_acc %.2f\tdev_f1 %.2f",
                e.epoch, e.learning_rate, e.train_loss, e.train_accuracy, e.dev_f1);
  return buf;
}

}  // namespace

std::unique_ptr<RelationModel> build_model(const RunConfig& rc,
                                           std::span<const LabeledSentence> train,
                                           const PretrainedEmbeddings* pretrained) {
  std::mt19937_64 rng(rc.seed());
  std::span<const std::string> extra;
  if (pretrained) extra = pretrained->tokens;
  if (rc.family() == "cnn") {
    CnnConfig config = rc.cnn();
    Vocabulary vocab = build_vocabulary(train, extra, config.position.uses_indicators());
    return std::make_unique<CnnModel>(std::move(config), std::move(vocab), rng, pretrained);
  }
  RnnConfig config = rc.rnn();
  Vocabulary vocab = build_vocabulary(train, extra, config.position.uses_indicators());
  return std::make_unique<RnnModel>(std::move(config), std::move(vocab), rng, pretrained);
}

RunData load_run_data(const RunConfig& rc) {
  std::string train_file = rc.get("train_file");
  if (train_file.empty()) {
    const std::string dir = default_data_dir();
    if (dir.empty()) {
      throw std::invalid_argument(std::string("no training file given and ") + kDataDirEnv +
                                  " is not set");
    }
    train_file = (std::filesystem::path(dir) / kTrainFileName).string();
  }
  RunData data;
  std::vector<LabeledSentence> all = read_corpus_file(train_file);
  const std::uint64_t seed = rc.seed();
  if (!rc.get("dev_file").empty()) {
    data.train = std::move(all);
    data.dev = read_corpus_file(rc.get("dev_file"));
  } else {
    auto split = split_train_dev(all, get_size(rc.settings, "dev_size"), seed);
    data.train = std::move(split.first);
    data.dev = std::move(split.second);
  }
  const std::size_t limit = get_size(rc.settings, "train_limit");
  if (limit > 0 && limit < data.train.size()) {
    data.train = split_train_dev(data.train, limit, seed).second;
  }
  if (data.train.empty()) throw ParseError("training file '" + train_file + "' has no sentences");
  return data;
}

TrainingRun run_training(const RunConfig& rc, const RunData& data, const std::string& out_dir,
                         std::ostream* log) {
  const auto start = std::chrono::steady_clock::now();
  TrainingRun run;
  run.train_sentences = data.train.size();
  run.dev_sentences = data.dev.size();

  std::optional<PretrainedEmbeddings> pretrained;
  if (!rc.get("embeddings").empty()) {
    std::unordered_set<std::string> keep;
    auto add_tokens = [&](std::span<const LabeledSentence> sentences) {
      for (const auto& s : sentences) keep.insert(s.tokens.begin(), s.tokens.end());
    };
    add_tokens(data.train);
    add_tokens(data.dev);
    for (const auto& path : split_commas(rc.get("extra_vocab"))) {
      add_tokens(read_corpus_file(path, ParseOptions{.allow_unlabeled = true}));
    }
    pretrained = load_pretrained_embeddings(rc.get("embeddings"), get_size(rc.settings, "word_dim"),
                                            &keep);
    if (log) *log << "loaded " << pretrained->tokens.size() << " pretrained vectors\n";
  }
  run.model = build_model(rc, data.train, pretrained ? &*pretrained : nullptr);
  run.vocab_size = run.model->vocab().size();

  std::string epoch_log;
  std::filesystem::path dir(out_dir);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(dir);
    write_text_file_atomic((dir / kDevSplitFile).string(), to_corpus_cache(data.dev));
  }
  auto on_epoch = [&](const EpochLog& e, const RelationModel& model) {
    const std::string line = format_epoch_line(e);
    if (log) *log << line << std::endl;
    if (!out_dir.empty()) {
      epoch_log += line + "\n";
      write_text_file_atomic((dir / kEpochLogFile).string(), epoch_log);
      save_checkpoint((dir / kCheckpointFile).string(), model);
    }
  };
  run.result = train(*run.model, data.train, data.dev, rc.train(), on_epoch);
  if (!data.dev.empty()) {
    run.final_dev_f1 = macro_f1(data.dev, predict_all(*run.model, data.dev)).macro_f1;
  }
  run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!out_dir.empty()) {
    save_checkpoint((dir / kCheckpointFile).string(), *run.model);
    write_text_file_atomic((dir / kManifestFile).string(), format_manifest(rc, run));
  }
  return run;
}

std::string format_manifest(const RunConfig& rc, const TrainingRun& run) {
  ConfigMap m;
  for (const auto& [k, v] : rc.settings) m["config." + k] = v;
  m["model_family"] = rc.family();
  m["seed"] = std::to_string(rc.seed());
  m["vocab_size"] = std::to_string(run.vocab_size);
  m["train_sentences"] = std::to_string(run.train_sentences);
  m["dev_sentences"] = std::to_string(run.dev_sentences);
  m["epochs_completed"] = std::to_string(run.result.epochs.size());
  m["diverged"] = run.result.diverged ? "true" : "false";
  if (run.result.diverged) m["divergence"] = run.result.error;
  for (const auto& e : run.result.epochs) {
    m[epoch_key(e.epoch, "learning_rate")] = format_double(e.learning_rate);
    m[epoch_key(e.epoch, "train_loss")] = format_double(e.train_loss);
    m[epoch_key(e.epoch, "dev_f1")] = format_double(e.dev_f1);
    if (e.train_accuracy >= 0.0) {
      m[epoch_key(e.epoch, "train_accuracy")] = format_double(e.train_accuracy);
    }
  }
  m["final_dev_f1"] = format_double(run.final_dev_f1);
  m["wall_time_seconds"] = format_double(run.wall_seconds);
  return format_key_values(m);
}

std::vector<LabeledSentence> make_toy_corpus(std::size_t n, std::size_t word_types,
                                             std::size_t min_len, std::size_t max_len,
                                             std::mt19937_64& rng) {
  if (min_len < 2 || max_len < min_len || word_types == 0) {
    throw std::invalid_argument("toy corpus needs 2 <= min_len <= max_len and some words");
  }
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  std::vector<LabeledSentence> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    LabeledSentence& s = out[i];
    s.id = static_cast<std::int64_t>(i + 1);
    const std::size_t len = uniform(min_len, max_len);
    for (std::size_t t = 0; t < len; ++t) {
      s.tokens.push_back("w" + std::to_string(uniform(0, word_types - 1)));
    }
    s.e1.first = uniform(0, len - 2);
    s.e1.last = uniform(s.e1.first, std::min(s.e1.first + 1, len - 2));
    s.e2.first = uniform(s.e1.last + 1, len - 1);
    s.e2.last = uniform(s.e2.first, std::min(s.e2.first + 1, len - 1));
    s.label = RelationLabel::from_id(uniform(0, kNumLabels - 1));
  }
  return out;
}

RunConfig toy_run_config(const RunConfig& rc) {
  ConfigMap s = rc.settings;
  s["word_dim"] = "8";
  s["position_clip"] = "4";
  s["pos_dim"] = std::to_string(std::min<std::size_t>(get_size(s, "pos_dim"), 4));
  if (rc.family() == "cnn") {
    s["feature_maps_per_window"] =
        std::to_string(std::min<std::size_t>(get_size(s, "feature_maps_per_window"), 4));
  } else {
    s["hidden"] = "16";
  }
  return resolve_run_config({s});
}

GradCheckReport toy_gradient_check(const RunConfig& full, std::uint64_t seed,
                                   std::size_t sentences, bool flip_conv_sign,
                                   const GradCheckOptions& options) {
  ConfigMap s = toy_run_config(full).settings;
  s["seed"] = std::to_string(seed);
  const RunConfig rc = resolve_run_config({s});
  const bool indicators = rc.get("position_variant") == "indicators";
  const std::size_t word_types = 50 - 2 - (indicators ? 4 : 0);
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  const auto corpus = make_toy_corpus(sentences, word_types, 3, 8, rng);
  auto model = build_model(rc, corpus, nullptr);

  const TrainConfig tc = rc.train();
  const LossFn loss = make_loss(tc.objective, tc.ranking);
  GradientSet analytic(model->params());
  for (const auto& sentence : corpus) model->accumulate_gradient(sentence, loss, analytic);
  if (flip_conv_sign) {
    auto* cnn = dynamic_cast<CnnModel*>(model.get());
    if (!cnn) throw std::invalid_argument("the conv sign fault applies to CNN architectures only");
    for (double& v : analytic.dense(cnn->filter_index(0, 0)).data()) v = -v;
  }
  auto total_loss = [&] {
    double sum = 0.0;
    for (const auto& sentence : corpus) sum += loss(model->score(sentence), sentence).loss;
    return sum;
  };
  GradCheckOptions opts = options;
  opts.seed = seed;
  return grad_check(total_loss, model->mutable_params(), analytic, opts);
}

}  // namespace relclass
