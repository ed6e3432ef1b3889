#include "relclass/checkpoint.h"

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>

#include "relclass/cnn_model.h"
#include "relclass/config_map.h"
#include "relclass/io.h"
#include "relclass/rnn_model.h"

namespace relclass {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint tensors are stored as little-endian doubles");

constexpr std::string_view kMagic = "relclass-checkpoint";

std::uint32_t crc_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes a uInt length; feed large inputs in chunks.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - pos, 1u << 30);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + pos), static_cast<uInt>(n));
    pos += n;
  }
  return static_cast<std::uint32_t>(crc);
}

// Sequential reader over the checksummed body.
class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view line() {
    const std::size_t nl = bytes_.find('\n', pos_);
    if (nl == std::string_view::npos) throw CheckpointError("checkpoint is truncated");
    std::string_view out = bytes_.substr(pos_, nl - pos_);
    pos_ = nl + 1;
    return out;
  }

  std::string_view raw(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw CheckpointError("checkpoint is truncated");
    std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const std::size_t sp = line.find(' ', pos);
    const std::size_t end = sp == std::string_view::npos ? line.size() : sp;
    if (end > pos) out.push_back(line.substr(pos, end - pos));
    pos = end + 1;
  }
  return out;
}

std::size_t expect_count(std::string_view line, std::string_view key) {
  auto f = fields(line);
  if (f.size() != 2 || f[0] != key) {
    throw CheckpointError("checkpoint: expected '" + std::string(key) + " <count>', got '" +
                          std::string(line) + "'");
  }
  try {
    return parse_size(f[1]);
  } catch (const std::invalid_argument&) {
    throw CheckpointError("checkpoint: bad count in '" + std::string(line) + "'");
  }
}

}  // namespace

std::string serialize_checkpoint(const RelationModel& model) {
  std::string out;
  out += std::string(kMagic) + " " + std::to_string(kCheckpointVersion) + "\n";
  out += "family " + model.family() + "\n";
  const ConfigMap config = model.config_map();
  out += "config " + std::to_string(config.size()) + "\n";
  out += format_key_values(config);
  const Vocabulary& vocab = model.vocab();
  out += "vocab " + std::to_string(vocab.size()) + "\n";
  for (const auto& t : vocab.tokens()) out += t + "\n";
  const ParameterSet& params = model.params();
  out += "params " + std::to_string(params.size()) + "\n";
  for (const Parameter& p : params) {
    out += "param " + p.name + " " + to_string(p.kind) + " " + std::to_string(p.value.rows()) +
           " " + std::to_string(p.value.cols()) + " " + std::to_string(p.frozen_rows.size());
    for (std::size_t r : p.frozen_rows) out += " " + std::to_string(r);
    out += "\n";
    const auto& data = p.value.data();
    out.append(reinterpret_cast<const char*>(data.data()), data.size() * sizeof(double));
    out += "\n";
  }
  char footer[32];
  std::snprintf(footer, sizeof(footer), "crc32 %08x\n", crc_of(out));
  out += footer;
  return out;
}

std::unique_ptr<RelationModel> deserialize_checkpoint(std::string_view bytes) {
  // Footer: "crc32 xxxxxxxx\n" (15 bytes).
  constexpr std::size_t kFooter = 15;
  if (bytes.size() < kFooter || bytes.substr(bytes.size() - kFooter, 6) != "crc32 " ||
      bytes.back() != '\n') {
    throw CheckpointError("checkpoint is truncated or has no checksum");
  }
  const std::string_view body = bytes.substr(0, bytes.size() - kFooter);
  const std::string stored(bytes.substr(bytes.size() - kFooter + 6, 8));
  char actual[16];
  std::snprintf(actual, sizeof(actual), "%08x", crc_of(body));
  if (stored != actual) {
    throw CheckpointError("checkpoint checksum mismatch (stored " + stored + ", computed " +
                          actual + "); the file is corrupted");
  }

  Reader in(body);
  {
    auto f = fields(in.line());
    if (f.size() != 2 || f[0] != kMagic) throw CheckpointError("not a relclass checkpoint");
    if (f[1] != std::to_string(kCheckpointVersion)) {
      throw CheckpointError("unsupported checkpoint version " + std::string(f[1]));
    }
  }
  std::string family;
  {
    auto f = fields(in.line());
    if (f.size() != 2 || f[0] != "family") throw CheckpointError("checkpoint: missing family");
    family = std::string(f[1]);
  }
  const std::size_t n_config = expect_count(in.line(), "config");
  std::string config_text;
  for (std::size_t i = 0; i < n_config; ++i) {
    config_text += in.line();
    config_text += '\n';
  }
  const std::size_t n_vocab = expect_count(in.line(), "vocab");
  std::vector<std::string> tokens;
  tokens.reserve(n_vocab);
  for (std::size_t i = 0; i < n_vocab; ++i) tokens.emplace_back(in.line());
  const std::size_t n_params = expect_count(in.line(), "params");
  ParameterSet params;
  for (std::size_t i = 0; i < n_params; ++i) {
    const std::string header(in.line());
    auto f = fields(header);
    if (f.size() < 6 || f[0] != "param") {
      throw CheckpointError("checkpoint: bad parameter header '" + header + "'");
    }
    try {
      const ParamKind kind = param_kind_from_string(std::string(f[2]));
      const std::size_t rows = parse_size(f[3]);
      const std::size_t cols = parse_size(f[4]);
      const std::size_t n_frozen = parse_size(f[5]);
      if (f.size() != 6 + n_frozen) throw std::invalid_argument("frozen row count");
      std::vector<double> data(rows * cols);
      const std::string_view raw = in.raw(data.size() * sizeof(double));
      std::memcpy(data.data(), raw.data(), raw.size());
      if (in.raw(1) != "\n") throw CheckpointError("checkpoint: tensor length mismatch");
      const std::size_t idx = params.add(std::string(f[1]), kind, Matrix(rows, cols, std::move(data)));
      for (std::size_t k = 0; k < n_frozen; ++k) {
        params[idx].frozen_rows.push_back(parse_size(f[6 + k]));
      }
    } catch (const std::invalid_argument& e) {
      throw CheckpointError("checkpoint: bad parameter header '" + header + "': " + e.what());
    }
  }
  if (!in.done()) throw CheckpointError("checkpoint: trailing bytes after the last tensor");

  try {
    const ConfigMap config = parse_key_values(config_text);
    Vocabulary vocab = Vocabulary::from_tokens(std::move(tokens));
    if (family == "cnn") {
      return std::make_unique<CnnModel>(CnnConfig::from_map(config), std::move(vocab),
                                        std::move(params));
    }
    if (family == "rnn") {
      return std::make_unique<RnnModel>(RnnConfig::from_map(config), std::move(vocab),
                                        std::move(params));
    }
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("checkpoint is incompatible with its config: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw CheckpointError(std::string("checkpoint is missing a parameter: ") + e.what());
  }
  throw CheckpointError("checkpoint: unknown model family '" + family + "'");
}

void save_checkpoint(const std::string& path, const RelationModel& model) {
  write_text_file_atomic(path, serialize_checkpoint(model));
}

std::unique_ptr<RelationModel> load_checkpoint(const std::string& path) {
  std::string bytes;
  try {
    bytes = read_text_file(path);
  } catch (const ParseError& e) {
    throw CheckpointError(e.what());
  }
  try {
    return deserialize_checkpoint(bytes);
  } catch (const CheckpointError& e) {
    throw CheckpointError(path + ": " + e.what());
  }
}

}  // namespace relclass
