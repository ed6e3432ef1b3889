#include "relclass/run_config.h"

#include <cstdlib>
#include <stdexcept>

#include "relclass/config_map.h"

namespace relclass {
namespace {

// Keys that are not model or optimizer settings.
ConfigMap run_defaults() {
  return {
      {"train_file", ""},
      {"dev_file", ""},
      {"embeddings", ""},
      {"extra_vocab", ""},
      {"dev_size", "1500"},
      {"train_limit", "0"},
      {"seed", "1"},
  };
}

ConfigMap model_only(const ConfigMap& settings, const ConfigMap& model_defaults) {
  ConfigMap out;
  for (const auto& [k, v] : model_defaults) out[k] = settings.at(k);
  return out;
}

}  // namespace

const std::vector<std::string>& architecture_names() {
  static const std::vector<std::string> names = {"cnn", "er-cnn", "uni-rnn", "bi-rnn",
                                                 "connectionist-rnn"};
  return names;
}

std::string architecture_family(const std::string& arch) {
  if (arch == "cnn" || arch == "er-cnn") return "cnn";
  if (arch == "uni-rnn" || arch == "bi-rnn" || arch == "connectionist-rnn") return "rnn";
  throw std::invalid_argument("unknown architecture '" + arch +
                              "' (expected cnn, er-cnn, uni-rnn, bi-rnn or connectionist-rnn)");
}

namespace {

// Model defaults without the keys fixed by the architecture name.
ConfigMap model_defaults(const std::string& arch) {
  ConfigMap m;
  if (architecture_family(arch) == "cnn") {
    m = CnnConfig{}.to_map();
    m.erase("context_mode");
  } else {
    m = RnnConfig{}.to_map();
    m.erase("variant");
  }
  return m;
}

}  // namespace

ConfigMap default_settings(const std::string& arch) {
  const bool cnn = architecture_family(arch) == "cnn";
  ConfigMap m = run_defaults();
  for (const auto& [k, v] : model_defaults(arch)) m[k] = v;
  for (const auto& [k, v] :
       (cnn ? TrainConfig::cnn_defaults() : TrainConfig::rnn_defaults()).to_map()) {
    if (k != "objective" && k != "seed") m[k] = v;
  }
  m["arch"] = arch;
  return m;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "table1-row1", "table1-row2", "table1-row3", "table1-row4", "table1-row5", "table1-row6",
      "table2-row1", "table2-row2", "table2-row3", "table2-row4", "table2-row5", "table2-row6",
      "table2-row7", "table2-row8"};
  return names;
}

ConfigMap preset_settings(const std::string& name) {
  // Each row adds one change to the row above it.
  std::vector<ConfigMap> cnn(6), rnn(8);
  cnn[0] = {{"arch", "cnn"},          {"window_sizes", "3"},       {"feature_maps_per_window", "1200"},
            {"word_dim", "50"},       {"position_variant", "none"}, {"pos_dim", "5"},
            {"objective", "softmax"}};
  cnn[1] = cnn[0];
  cnn[1]["position_variant"] = "embeddings";
  cnn[2] = cnn[1];
  cnn[2]["window_sizes"] = "2,3,4,5";
  cnn[2]["feature_maps_per_window"] = "300";
  cnn[3] = cnn[2];
  cnn[3]["objective"] = "ranking";
  cnn[4] = cnn[3];
  cnn[4]["arch"] = "er-cnn";
  cnn[5] = cnn[4];
  cnn[5]["word_dim"] = "400";
  cnn[5]["pos_dim"] = "35";

  rnn[0] = {{"arch", "uni-rnn"},       {"position_variant", "none"}, {"pos_dim", "5"},
            {"word_dim", "50"},         {"objective", "softmax"}};
  rnn[1] = rnn[0];
  rnn[1]["position_variant"] = "embeddings";
  rnn[2] = rnn[0];
  rnn[2]["position_variant"] = "embeddings+flag";
  rnn[3] = rnn[0];
  rnn[3]["position_variant"] = "indicators";
  rnn[4] = rnn[3];
  rnn[4]["arch"] = "bi-rnn";
  rnn[5] = rnn[4];
  rnn[5]["arch"] = "connectionist-rnn";
  rnn[6] = rnn[5];
  rnn[6]["objective"] = "ranking";
  rnn[7] = rnn[6];
  rnn[7]["word_dim"] = "400";

  const auto& names = preset_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i < cnn.size() ? cnn[i] : rnn[i - cnn.size()];
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

RunConfig resolve_run_config(const std::vector<ConfigMap>& layers) {
  ConfigMap user;
  for (const auto& layer : layers) {
    for (const auto& [k, v] : layer) user[k] = v;
  }
  auto it = user.find("arch");
  if (it == user.end() || it->second.empty()) {
    throw std::invalid_argument("no architecture given (set arch or use a preset)");
  }
  RunConfig rc;
  rc.arch = it->second;
  rc.settings = default_settings(rc.arch);
  for (const auto& [k, v] : user) {
    if (!rc.settings.count(k)) {
      throw std::invalid_argument("unknown setting '" + k + "' for architecture " + rc.arch);
    }
    rc.settings[k] = v;
  }
  // Validate everything up front.
  if (rc.family() == "cnn") {
    rc.cnn();
  } else {
    rc.rnn();
  }
  rc.train();
  get_size(rc.settings, "dev_size");
  get_size(rc.settings, "train_limit");
  return rc;
}

CnnConfig RunConfig::cnn() const {
  ConfigMap m = model_only(settings, model_defaults(arch));
  m["context_mode"] = arch == "er-cnn" ? "extended" : "middle";
  return CnnConfig::from_map(m);
}

RnnConfig RunConfig::rnn() const {
  ConfigMap m = model_only(settings, model_defaults(arch));
  m["variant"] = arch == "uni-rnn" ? "uni" : arch == "bi-rnn" ? "bi" : "connectionist";
  return RnnConfig::from_map(m);
}

TrainConfig RunConfig::train() const {
  const bool cnn = family() == "cnn";
  return TrainConfig::from_map(settings,
                               cnn ? TrainConfig::cnn_defaults() : TrainConfig::rnn_defaults());
}

std::uint64_t RunConfig::seed() const { return get_u64(settings, "seed"); }

std::string RunConfig::get(const std::string& key) const {
  auto it = settings.find(key);
  return it == settings.end() ? std::string() : it->second;
}

std::string default_data_dir() {
  const char* dir = std::getenv(kDataDirEnv);
  return dir ? std::string(dir) : std::string();
}

}  // namespace relclass
