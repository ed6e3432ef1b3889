#ifndef RELCLASS_RUN_CONFIG_H_
#define RELCLASS_RUN_CONFIG_H_

#include <string>
#include <vector>

#include "relclass/cnn_model.h"
#include "relclass/model.h"
#include "relclass/rnn_model.h"
#include "relclass/training.h"

namespace relclass {

// Environment variable naming the directory that holds TRAIN_FILE.TXT and
// TEST_FILE_FULL.TXT when no explicit paths are given.
inline constexpr const char* kDataDirEnv = "RELCLASS_DATA_DIR";
inline constexpr const char* kTrainFileName = "TRAIN_FILE.TXT";
inline constexpr const char* kTestFileName = "TEST_FILE_FULL.TXT";

// Architectures: "cnn" (middle context), "er-cnn" (extended context),
// "uni-rnn", "bi-rnn", "connectionist-rnn".
const std::vector<std::string>& architecture_names();
// "cnn" or "rnn"; throws std::invalid_argument on an unknown architecture.
std::string architecture_family(const std::string& arch);

// Fully resolved settings of one run. Every key has a value.
struct RunConfig {
  std::string arch;
  ConfigMap settings;  // includes "arch"

  std::string family() const { return architecture_family(arch); }
  CnnConfig cnn() const;
  RnnConfig rnn() const;
  TrainConfig train() const;
  std::uint64_t seed() const;
  // Empty string when unset.
  std::string get(const std::string& key) const;
};

// All keys accepted for an architecture, with their defaults.
ConfigMap default_settings(const std::string& arch);

// Named ablation-ladder presets: table1-row1..6 (CNN) and table2-row1..8
// (RNN). Each sets "arch" and the model settings of its row.
const std::vector<std::string>& preset_names();
ConfigMap preset_settings(const std::string& name);

// Merges layers in order (later layers win) over the defaults of the
// architecture named in the merged layers. Throws std::invalid_argument for
// a missing or unknown architecture and for unknown keys or bad values.
RunConfig resolve_run_config(const std::vector<ConfigMap>& layers);

// Directory from kDataDirEnv, or empty.
std::string default_data_dir();

}  // namespace relclass

#endif  // RELCLASS_RUN_CONFIG_H_
