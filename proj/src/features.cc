#include "relclass/features.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace relclass {
namespace {

constexpr const char* kWordTable = "word_embeddings";
constexpr const char* kPos1Table = "pos1_embeddings";
constexpr const char* kPos2Table = "pos2_embeddings";

void append_range(std::vector<std::size_t>& v, std::size_t first, std::size_t end) {
  for (std::size_t i = first; i < end; ++i) v.push_back(i);
}

int clip_distance(long d, int clip) {
  return static_cast<int>(std::clamp<long>(d, -clip, clip));
}

int distance_to(const Span& span, std::size_t i, int clip) {
  const long pos = static_cast<long>(i);
  if (pos < static_cast<long>(span.first)) {
    return clip_distance(pos - static_cast<long>(span.first), clip);
  }
  if (pos > static_cast<long>(span.last)) {
    return clip_distance(pos - static_cast<long>(span.last), clip);
  }
  return 0;
}

void check_tables(const FeatureSpace& space, const ParameterSet& params) {
  require_shape(space.vocab != nullptr, "feature space has no vocabulary");
  const Matrix& word = params[space.word_table].value;
  if (word.rows() < space.vocab->size()) {
    throw ShapeError("word table has " + std::to_string(word.rows()) +
                     " rows for a vocabulary of " + std::to_string(space.vocab->size()));
  }
  require_shape(word.cols() == space.word_dim, "word table width mismatch");
  if (space.position.uses_embeddings()) {
    require_shape(space.pos1_table && space.pos2_table,
                  "position variant needs position tables");
  }
}

TokenRef padding_ref(const FeatureSpace& space) {
  TokenRef r;
  r.word = Vocabulary::kPadding;
  r.pos1 = r.pos2 = space.position.padding_bucket();
  return r;
}

void write_features(const TokenRef& ref, const FeatureSpace& space, const ParameterSet& params,
                    std::span<double> out) {
  auto word = params[space.word_table].value.row(ref.word);
  std::copy(word.begin(), word.end(), out.begin());
  std::size_t offset = word.size();
  if (space.position.uses_embeddings()) {
    auto p1 = params[*space.pos1_table].value.row(ref.pos1);
    std::copy(p1.begin(), p1.end(), out.begin() + offset);
    offset += p1.size();
    auto p2 = params[*space.pos2_table].value.row(ref.pos2);
    std::copy(p2.begin(), p2.end(), out.begin() + offset);
    offset += p2.size();
  }
  if (space.position.uses_flag()) out[offset] = ref.flag;
}

void scatter_features(const TokenRef& ref, const FeatureSpace& space,
                      std::span<const double> g, GradientSet& grads) {
  const std::size_t wd = space.word_dim;
  grads.add_row(space.word_table, ref.word, g.subspan(0, wd));
  if (space.position.uses_embeddings()) {
    const std::size_t pd = space.position.pos_dim;
    grads.add_row(*space.pos1_table, ref.pos1, g.subspan(wd, pd));
    grads.add_row(*space.pos2_table, ref.pos2, g.subspan(wd + pd, pd));
  }
}

std::vector<TokenRef> sentence_refs(const LabeledSentence& s, const FeatureSpace& space) {
  const auto& pos = space.position;
  std::vector<TokenRef> refs(s.tokens.size());
  const auto dist = relative_positions(s, pos.clip);
  const auto flags = entity_flags(s);
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    refs[i].word = space.vocab->lookup(s.tokens[i]);
    refs[i].pos1 = pos.bucket(dist[i].first);
    refs[i].pos2 = pos.bucket(dist[i].second);
    refs[i].flag = flags[i];
  }
  return refs;
}

}  // namespace

const char* to_string(PositionVariant v) {
  switch (v) {
    case PositionVariant::kNone: return "none";
    case PositionVariant::kEmbeddings: return "embeddings";
    case PositionVariant::kEmbeddingsPlusFlag: return "embeddings+flag";
    case PositionVariant::kIndicators: return "indicators";
  }
  return "none";
}

PositionVariant position_variant_from_string(const std::string& s) {
  if (s == "none") return PositionVariant::kNone;
  if (s == "embeddings") return PositionVariant::kEmbeddings;
  if (s == "embeddings+flag") return PositionVariant::kEmbeddingsPlusFlag;
  if (s == "indicators") return PositionVariant::kIndicators;
  throw std::invalid_argument("unknown position variant '" + s + "'");
}

void PositionFeatureConfig::validate() const {
  if (clip <= 0) throw std::invalid_argument("position clip must be positive");
  if (uses_embeddings() && pos_dim == 0) {
    throw std::invalid_argument("position embeddings need pos_dim > 0");
  }
}

ContextViews split_contexts(const LabeledSentence& s) {
  ContextViews v;
  const std::size_t n = s.tokens.size();
  append_range(v.left, 0, s.e1.first);
  append_range(v.e1, s.e1.first, s.e1.last + 1);
  append_range(v.middle, s.e1.last + 1, s.e2.first);
  append_range(v.e2, s.e2.first, s.e2.last + 1);
  append_range(v.right, s.e2.last + 1, n);
  append_range(v.extended_1, 0, s.e2.first);
  append_range(v.extended_2, s.e1.last + 1, n);
  return v;
}

std::vector<std::pair<int, int>> relative_positions(const LabeledSentence& s, int clip) {
  if (clip <= 0) throw std::invalid_argument("position clip must be positive");
  std::vector<std::pair<int, int>> d(s.tokens.size());
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    d[i] = {distance_to(s.e1, i, clip), distance_to(s.e2, i, clip)};
  }
  return d;
}

LabeledSentence insert_position_indicators(const LabeledSentence& s) {
  LabeledSentence out;
  out.id = s.id;
  out.label = s.label;
  out.tokens.reserve(s.tokens.size() + 4);
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    if (i == s.e1.first) out.tokens.emplace_back(kE1Open);
    if (i == s.e2.first) out.tokens.emplace_back(kE2Open);
    out.tokens.push_back(s.tokens[i]);
    if (i == s.e1.last) out.tokens.emplace_back(kE1Close);
    if (i == s.e2.last) out.tokens.emplace_back(kE2Close);
  }
  out.e1 = {s.e1.first + 1, s.e1.last + 1};
  out.e2 = {s.e2.first + 3, s.e2.last + 3};
  return out;
}

std::vector<int> entity_flags(const LabeledSentence& s) {
  std::vector<int> flags(s.tokens.size(), 0);
  for (std::size_t i = 0; i < flags.size(); ++i) {
    flags[i] = (s.e1.contains(i) || s.e2.contains(i)) ? 1 : 0;
  }
  return flags;
}

std::size_t FeatureSpace::token_width() const {
  std::size_t w = word_dim;
  if (position.uses_embeddings()) w += 2 * position.pos_dim;
  if (position.uses_flag()) w += 1;
  return w;
}

FeatureSpace add_embedding_tables(ParameterSet& params, const Vocabulary& vocab,
                                  std::size_t word_dim, const PositionFeatureConfig& position,
                                  std::mt19937_64& rng, const PretrainedEmbeddings* pretrained) {
  position.validate();
  if (pretrained && pretrained->dim() != word_dim) {
    throw std::invalid_argument("pretrained embeddings have dimension " +
                                std::to_string(pretrained->dim()) + " but word_dim is " +
                                std::to_string(word_dim));
  }
  std::uniform_real_distribution<double> word_init(-0.25, 0.25);
  Matrix word(vocab.size(), word_dim);
  for (double& v : word.data()) v = word_init(rng);
  if (pretrained) {
    for (std::size_t k = 0; k < pretrained->tokens.size(); ++k) {
      auto idx = vocab.find(pretrained->tokens[k]);
      if (!idx || *idx == Vocabulary::kPadding) continue;
      auto src = pretrained->vectors.row(k);
      std::copy(src.begin(), src.end(), word.row(*idx).begin());
    }
  }
  for (double& v : word.row(Vocabulary::kPadding)) v = 0.0;

  FeatureSpace space;
  space.vocab = &vocab;
  space.position = position;
  space.word_dim = word_dim;
  space.word_table = params.add(kWordTable, ParamKind::kEmbedding, std::move(word));
  params[space.word_table].frozen_rows = {Vocabulary::kPadding};
  if (position.uses_embeddings()) {
    for (const char* name : {kPos1Table, kPos2Table}) {
      Matrix table(position.buckets(), position.pos_dim);
      for (double& v : table.data()) v = word_init(rng);
      const std::size_t idx = params.add(name, ParamKind::kEmbedding, std::move(table));
      (name == kPos1Table ? space.pos1_table : space.pos2_table) = idx;
    }
  }
  return space;
}

FeatureSpace bind_embedding_tables(const ParameterSet& params, const Vocabulary& vocab,
                                   const PositionFeatureConfig& position) {
  position.validate();
  FeatureSpace space;
  space.vocab = &vocab;
  space.position = position;
  space.word_table = params.index_of(kWordTable);
  space.word_dim = params[space.word_table].value.cols();
  if (position.uses_embeddings()) {
    space.pos1_table = params.index_of(kPos1Table);
    space.pos2_table = params.index_of(kPos2Table);
    for (auto t : {*space.pos1_table, *space.pos2_table}) {
      require_shape(params[t].value.rows() == position.buckets() &&
                        params[t].value.cols() == position.pos_dim,
                    "position table shape does not match the position config");
    }
  }
  check_tables(space, params);
  return space;
}

EncodedInput encode_cnn_input(const LabeledSentence& s, std::span<const std::size_t> context,
                              const FeatureSpace& space, const ParameterSet& params,
                              std::size_t max_window) {
  if (space.position.variant != PositionVariant::kEmbeddings &&
      space.position.variant != PositionVariant::kNone) {
    throw std::invalid_argument(std::string("CNN input does not support position variant '") +
                                to_string(space.position.variant) + "'");
  }
  require_shape(max_window >= 1, "max window must be positive");
  check_tables(space, params);
  const auto all = sentence_refs(s, space);
  const std::size_t pad = max_window - 1;
  EncodedInput enc;
  enc.refs.reserve(context.size() + 2 * pad);
  enc.refs.insert(enc.refs.end(), pad, padding_ref(space));
  for (std::size_t i : context) {
    require_shape(i < all.size(), "context position out of range");
    enc.refs.push_back(all[i]);
  }
  enc.refs.insert(enc.refs.end(), pad, padding_ref(space));
  // Only reachable with max_window 1 and an empty context.
  while (enc.refs.size() < max_window) enc.refs.push_back(padding_ref(space));

  const std::size_t width = space.token_width();
  enc.values = Matrix(enc.refs.size(), width);
  for (std::size_t t = 0; t < enc.refs.size(); ++t) {
    write_features(enc.refs[t], space, params, enc.values.row(t));
  }
  return enc;
}

EncodedInput encode_rnn_input(const LabeledSentence& s, const FeatureSpace& space,
                              const ParameterSet& params) {
  check_tables(space, params);
  std::vector<TokenRef> tokens;
  if (space.position.uses_indicators()) {
    tokens = sentence_refs(insert_position_indicators(s), space);
  } else {
    tokens = sentence_refs(s, space);
  }
  EncodedInput enc;
  enc.refs.reserve(tokens.size() + 2);
  enc.refs.push_back(padding_ref(space));
  enc.refs.insert(enc.refs.end(), tokens.begin(), tokens.end());
  enc.refs.push_back(padding_ref(space));

  const std::size_t width = space.token_width();
  const std::size_t steps = tokens.size();
  enc.values = Matrix(steps, 3 * width);
  for (std::size_t t = 0; t < steps; ++t) {
    auto row = enc.values.row(t);
    for (std::size_t k = 0; k < 3; ++k) {
      write_features(enc.refs[t + k], space, params, row.subspan(k * width, width));
    }
  }
  return enc;
}

void scatter_cnn_gradient(const EncodedInput& input, const Matrix& dvalues,
                          const FeatureSpace& space, GradientSet& grads) {
  require_shape(dvalues.rows() == input.refs.size() && dvalues.cols() == space.token_width(),
                "CNN input gradient has shape " + shape_string(dvalues));
  for (std::size_t t = 0; t < input.refs.size(); ++t) {
    scatter_features(input.refs[t], space, dvalues.row(t), grads);
  }
}

void scatter_rnn_gradient(const EncodedInput& input, const Matrix& dvalues,
                          const FeatureSpace& space, GradientSet& grads) {
  const std::size_t width = space.token_width();
  require_shape(dvalues.rows() + 2 == input.refs.size() && dvalues.cols() == 3 * width,
                "RNN input gradient has shape " + shape_string(dvalues));
  for (std::size_t t = 0; t < dvalues.rows(); ++t) {
    auto row = dvalues.row(t);
    for (std::size_t k = 0; k < 3; ++k) {
      scatter_features(input.refs[t + k], space, row.subspan(k * width, width), grads);
    }
  }
}

PretrainedEmbeddings load_pretrained_embeddings(const std::string& path,
                                                std::size_t expected_dim,
                                                const std::unordered_set<std::string>* keep) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open embedding file '" + path + "'");
  PretrainedEmbeddings out;
  std::unordered_set<std::string> seen;
  std::vector<double> values;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<std::string> rest;
    for (std::string f; fields >> f;) rest.push_back(std::move(f));
    if (line_no == 1 && rest.size() == 1) {
      // "<count> <dim>" header.
      char* end = nullptr;
      std::strtoull(token.c_str(), &end, 10);
      if (*end == '\0') continue;
    }
    if (dim == 0) {
      dim = rest.size();
      if (dim == 0) throw ParseError(path + ": line " + std::to_string(line_no) + " has no values");
      if (expected_dim != 0 && dim != expected_dim) {
        throw ParseError(path + ": embeddings have dimension " + std::to_string(dim) +
                         ", expected " + std::to_string(expected_dim));
      }
    }
    if (rest.size() != dim) {
      throw ParseError(path + ": line " + std::to_string(line_no) + " has " +
                       std::to_string(rest.size()) + " values, expected " +
                       std::to_string(dim));
    }
    for (char& c : token) {
      if (static_cast<unsigned char>(c) < 128) c = static_cast<char>(std::tolower(c));
    }
    if (keep && !keep->count(token)) continue;
    if (!seen.insert(token).second) continue;
    for (const auto& f : rest) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw ParseError(path + ": line " + std::to_string(line_no) + ": bad number '" + f +
                         "'");
      }
      values.push_back(v);
    }
    out.tokens.push_back(std::move(token));
  }
  if (dim == 0 && expected_dim != 0) dim = expected_dim;
  out.vectors = Matrix(out.tokens.size(), dim, std::move(values));
  return out;
}

}  // namespace relclass
