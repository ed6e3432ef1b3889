// Command-line front end: train, predict, eval, ensemble, gradcheck, presets.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "relclass/checkpoint.h"
#include "relclass/config_map.h"
#include "relclass/evaluation.h"
#include "relclass/io.h"
#include "relclass/pipeline.h"
#include "relclass/run_config.h"

namespace {

using namespace relclass;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

// Exceptions that carry an exit code out of a command.
struct ExitError : std::runtime_error {
  ExitError(int code, const std::string& what) : std::runtime_error(what), code(code) {}
  int code;
};

std::string data_file_or_default(const std::string& given, const char* file_name) {
  if (!given.empty()) return given;
  const std::string dir = default_data_dir();
  if (dir.empty()) {
    throw std::invalid_argument(std::string("no data file given and ") + kDataDirEnv +
                                " is not set");
  }
  return (std::filesystem::path(dir) / file_name).string();
}

// Gold answers: either a prediction-format key file or a corpus file.
std::vector<LabeledSentence> read_gold(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    std::vector<LabeledSentence> gold;
    for (const auto& p : parse_predictions(text)) {
      LabeledSentence s;
      s.id = p.id;
      s.label = p.label;
      gold.push_back(std::move(s));
    }
    return gold;
  } catch (const ParseError&) {
    return read_corpus_file(path);
  }
}

void write_predictions(const std::string& out, const std::vector<PredictionRecord>& preds) {
  if (out == "-") {
    std::cout << format_predictions(preds);
  } else {
    write_prediction_file(out, preds);
  }
}

struct TrainArgs {
  std::string preset, config_file, arch, out;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;
  bool print_config = false;
};

int cmd_train(const TrainArgs& a) {
  std::vector<ConfigMap> layers;
  if (!a.preset.empty()) layers.push_back(preset_settings(a.preset));
  if (!a.config_file.empty()) layers.push_back(parse_key_values(read_text_file(a.config_file)));
  ConfigMap cli;
  if (!a.arch.empty()) cli["arch"] = a.arch;
  for (const auto& [k, v] : a.flags) {
    if (!v.empty()) cli[k] = v;
  }
  for (const auto& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    }
    cli[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  layers.push_back(cli);
  const RunConfig rc = resolve_run_config(layers);
  if (a.print_config) {
    std::cout << format_key_values(rc.settings);
    return kExitOk;
  }
  if (a.out.empty()) throw std::invalid_argument("--out is required");
  const RunData data = load_run_data(rc);
  std::cerr << "training " << rc.arch << " on " << data.train.size() << " sentences, dev "
            << data.dev.size() << "\n";
  const TrainingRun run = run_training(rc, data, a.out, &std::cerr);
  std::cout << "vocab_size = " << run.vocab_size << "\n";
  std::cout << "final_dev_f1 = " << format_double(run.final_dev_f1) << "\n";
  std::cout << "run_dir = " << a.out << "\n";
  if (run.result.diverged) {
    throw ExitError(kExitNumeric, "training diverged (" + run.result.error +
                                      "); the checkpoint holds the last good epoch");
  }
  return kExitOk;
}

int cmd_predict(const std::string& checkpoint, const std::string& data_file,
                const std::string& out) {
  auto model = load_checkpoint(checkpoint);
  const auto sentences = read_corpus_file(data_file_or_default(data_file, kTestFileName),
                                          ParseOptions{.allow_unlabeled = true});
  write_predictions(out, predict_all(*model, sentences));
  return kExitOk;
}

int cmd_eval(const std::string& gold_file, std::vector<std::string> preds) {
  if (preds.empty() || preds.size() > 2) {
    throw std::invalid_argument("eval takes one prediction file, or two to compare");
  }
  const auto gold = read_gold(data_file_or_default(gold_file, kTestFileName));
  std::vector<std::vector<PredictionRecord>> sets;
  for (const auto& p : preds) sets.push_back(read_prediction_file(p));
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets.size() > 1) std::cout << "== " << preds[i] << "\n";
    print_report(std::cout, macro_f1(gold, sets[i]));
    if (sets.size() > 1) std::cout << "\n";
  }
  if (sets.size() == 2) {
    const ZTestResult z = significance_z_test(sets[0], sets[1], gold);
    ConfigMap kv;
    kv["z_test.n"] = std::to_string(z.n);
    kv["z_test.accuracy_a"] = format_double(z.accuracy_a);
    kv["z_test.accuracy_b"] = format_double(z.accuracy_b);
    kv["z_test.z"] = format_double(z.z);
    kv["z_test.p_value"] = format_double(z.p_value);
    std::cout << "== significance (two-proportion z-test, two-tailed)\n" << format_key_values(kv);
  }
  return kExitOk;
}

int cmd_ensemble(const std::vector<std::string>& pred_files,
                 const std::vector<std::string>& checkpoints, const std::string& data_file,
                 std::uint64_t seed, const std::string& out) {
  std::vector<std::vector<PredictionRecord>> sets;
  for (const auto& p : pred_files) sets.push_back(read_prediction_file(p));
  if (!checkpoints.empty()) {
    const auto sentences = read_corpus_file(data_file_or_default(data_file, kTestFileName),
                                            ParseOptions{.allow_unlabeled = true});
    for (const auto& c : checkpoints) sets.push_back(predict_all(*load_checkpoint(c), sentences));
  }
  if (sets.empty()) throw std::invalid_argument("ensemble needs at least one member");
  write_predictions(out, ensemble_vote(sets, seed));
  return kExitOk;
}

int cmd_gradcheck(const std::string& arch, const std::string& preset, std::uint64_t seed,
                  std::size_t seeds, double tolerance, double epsilon,
                  const std::string& fault) {
  ConfigMap layer = preset.empty() ? ConfigMap{} : preset_settings(preset);
  if (!arch.empty()) layer["arch"] = arch;
  const RunConfig rc = resolve_run_config({layer});
  if (!fault.empty() && fault != "conv-sign") {
    throw std::invalid_argument("unknown fault '" + fault + "'");
  }
  GradCheckOptions options;
  options.tolerance = tolerance;
  options.epsilon = epsilon;
  bool ok = true;
  for (std::size_t k = 0; k < seeds; ++k) {
    const GradCheckReport report =
        toy_gradient_check(rc, seed + k, 4, fault == "conv-sign", options);
    std::cout << "== " << rc.arch << (preset.empty() ? "" : " (" + preset + ")") << " seed "
              << seed + k << "\n";
    print_report(std::cout, report);
    ok = ok && report.passed;
  }
  if (!ok) throw ExitError(kExitNumeric, "gradient check failed");
  return kExitOk;
}

int cmd_presets() {
  for (const auto& name : preset_names()) {
    std::cout << name << ":";
    for (const auto& [k, v] : preset_settings(name)) std::cout << " " << k << "=" << v;
    std::cout << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relation classification with CNN and RNN sentence models"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "train a model and write a run directory");
  t->add_option("--preset", train.preset, "ablation-ladder preset, e.g. table1-row3");
  t->add_option("--config", train.config_file, "key = value settings file");
  t->add_option("--arch", train.arch, "cnn, er-cnn, uni-rnn, bi-rnn or connectionist-rnn");
  t->add_option("--out", train.out, "run directory");
  t->add_option("--set", train.sets, "override any setting: key=value (repeatable)");
  const std::vector<std::pair<std::string, std::string>> flag_keys = {
      {"--train", "train_file"},       {"--dev", "dev_file"},       {"--emb", "embeddings"},
      {"--extra-vocab", "extra_vocab"}, {"--seed", "seed"},         {"--epochs", "epochs"},
      {"--dev-size", "dev_size"},      {"--train-limit", "train_limit"},
      {"--learning-rate", "learning_rate"}, {"--batch-size", "batch_size"},
      {"--word-dim", "word_dim"},      {"--hidden", "hidden"}};
  for (const auto& [flag, key] : flag_keys) {
    t->add_option(flag, train.flags[key], "sets " + key);
  }
  t->add_flag("--print-config", train.print_config, "print the resolved settings and exit");

  std::string checkpoint, data_file, out = "-";
  auto* p = app.add_subcommand("predict", "label sentences with a trained model");
  p->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  p->add_option("--data", data_file, "corpus file (default: test file in the data directory)");
  p->add_option("--out", out, "prediction file, '-' for stdout");

  std::string gold;
  std::vector<std::string> preds, compare;
  auto* e = app.add_subcommand("eval", "score prediction files against gold labels");
  e->add_option("--gold", gold, "gold corpus or key file (default: test file in the data directory)");
  e->add_option("predictions", preds, "one prediction file, or two to compare");
  e->add_option("--compare", compare, "two prediction files to compare")->expected(2);

  std::vector<std::string> members, member_checkpoints;
  std::uint64_t seed = 1;
  auto* en = app.add_subcommand("ensemble", "plurality vote over several systems");
  en->add_option("predictions", members, "prediction files");
  en->add_option("--checkpoint", member_checkpoints, "checkpoints to run on --data");
  en->add_option("--data", data_file, "corpus for --checkpoint members");
  en->add_option("--seed", seed, "tie-break seed");
  en->add_option("--out", out, "prediction file, '-' for stdout");

  std::string arch, preset, fault;
  std::size_t seeds = 1;
  double tolerance = 1e-4;
  double epsilon = GradCheckOptions{}.epsilon;
  auto* g = app.add_subcommand("gradcheck", "finite-difference check of a toy model");
  g->add_option("--arch", arch, "architecture");
  g->add_option("--preset", preset, "ablation-ladder preset");
  g->add_option("--seed", seed, "first seed");
  g->add_option("--seeds", seeds, "number of consecutive seeds");
  g->add_option("--tolerance", tolerance, "maximum relative error");
  g->add_option("--epsilon", epsilon, "finite-difference step");
  g->add_option("--inject-fault", fault)->group("");

  auto* ps = app.add_subcommand("presets", "list the ablation-ladder presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*t) return cmd_train(train);
    if (*p) return cmd_predict(checkpoint, data_file, out);
    if (*e) {
      if (!compare.empty() && !preds.empty()) {
        throw std::invalid_argument("use either positional prediction files or --compare");
      }
      return cmd_eval(gold, compare.empty() ? preds : compare);
    }
    if (*en) return cmd_ensemble(members, member_checkpoints, data_file, seed, out);
    if (*g) return cmd_gradcheck(arch, preset, seed, seeds, tolerance, epsilon, fault);
    if (*ps) return cmd_presets();
  } catch (const ExitError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return err.code;
  } catch (const NumericError& err) {
    std::cerr << "numeric error: " << err.what() << "\n";
    return kExitNumeric;
  } catch (const ParseError& err) {
    std::cerr << "data error: " << err.what() << "\n";
    return kExitData;
  } catch (const CheckpointError& err) {
    std::cerr << "checkpoint error: " << err.what() << "\n";
    return kExitData;
  } catch (const AlignmentError& err) {
    std::cerr << "alignment error: " << err.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
