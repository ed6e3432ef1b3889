#ifndef RELCLASS_CHECKPOINT_H_
#define RELCLASS_CHECKPOINT_H_

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include "relclass/model.h"

namespace relclass {

// Raised for unreadable, truncated, corrupted or incompatible checkpoints.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kCheckpointVersion = 1;

// Container layout (all header lines are text, tensors are raw little-endian
// IEEE doubles so the round trip is bit-exact):
//
//   relclass-checkpoint <version>
//   family <cnn|rnn>
//   config <count>
//   <key> = <value>            (count lines)
//   vocab <count>
//   <token>                    (count lines, id order)
//   params <count>
//   param <name> <kind> <rows> <cols> <n_frozen> [frozen rows...]
//   <rows*cols*8 bytes>\n      (per parameter)
//   crc32 <8 hex digits>\n     (over every preceding byte)
std::string serialize_checkpoint(const RelationModel& model);
std::unique_ptr<RelationModel> deserialize_checkpoint(std::string_view bytes);

// Atomic write (temp file then rename).
void save_checkpoint(const std::string& path, const RelationModel& model);
std::unique_ptr<RelationModel> load_checkpoint(const std::string& path);

}  // namespace relclass

#endif  // RELCLASS_CHECKPOINT_H_
