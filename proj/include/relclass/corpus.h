#ifndef RELCLASS_CORPUS_H_
#define RELCLASS_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "relclass/labels.h"

namespace relclass {

// Raised for malformed corpus input. The message names the record id and/or
// line number.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inclusive token index range.
struct Span {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t length() const { return last - first + 1; }
  bool contains(std::size_t i) const { return i >= first && i <= last; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct LabeledSentence {
  std::int64_t id = 0;
  std::vector<std::string> tokens;
  Span e1;
  Span e2;
  RelationLabel label;

  friend bool operator==(const LabeledSentence&, const LabeledSentence&) = default;
};

// Throws ParseError unless both spans are non-empty and in bounds with e1
// ending before e2 starts.
void validate_spans(const LabeledSentence& s);

struct TokenizedSentence {
  std::vector<std::string> tokens;
  Span e1;
  Span e2;
};

// Lowercases ASCII and splits on whitespace. Leading and trailing
// punctuation characters become single-character tokens; internal punctuation
// such as hyphens stays. Entity tags <e1>..</e1> and <e2>..</e2>
// must each occur once, in that order, without nesting.
TokenizedSentence tokenize(std::string_view raw_sentence);

struct ParseOptions {
  // Accept records without a relation line (the unlabeled test file); such
  // records get the Other label.
  bool allow_unlabeled = false;
};

// Parses the SemEval 2010 Task 8 distribution format:
//   <id>\t"<sentence with entity tags>"
//   <relation>
//   Comment: ...        (optional)
//   <blank line>
std::vector<LabeledSentence> parse_semeval_file(std::string_view text,
                                                const ParseOptions& options = {});

// Writes sentences back in the distribution format; parse_semeval_file of the
// result reproduces the input.
std::string to_semeval_text(std::span<const LabeledSentence> sentences);

// Line-delimited cache:
//   id \t label \t space-joined-tokens \t e1_first:e1_last \t e2_first:e2_last
std::string to_corpus_cache(std::span<const LabeledSentence> sentences);
std::vector<LabeledSentence> parse_corpus_cache(std::string_view text);

// True when the first non-blank line looks like a cache record.
bool looks_like_corpus_cache(std::string_view text);

// Reads a file in either format. Throws ParseError (also for unreadable files).
std::vector<LabeledSentence> read_corpus_file(const std::string& path,
                                              const ParseOptions& options = {});

// Seeded uniform sample of dev_size sentences for dev; both parts keep the
// input order. Throws std::invalid_argument when dev_size >= corpus size
// (unless both are zero-sized requests on an empty dev).
std::pair<std::vector<LabeledSentence>, std::vector<LabeledSentence>> split_train_dev(
    std::span<const LabeledSentence> sentences, std::size_t dev_size, std::uint64_t seed);

inline constexpr std::string_view kE1Open = "<e1>";
inline constexpr std::string_view kE1Close = "</e1>";
inline constexpr std::string_view kE2Open = "<e2>";
inline constexpr std::string_view kE2Close = "</e2>";

class Vocabulary {
 public:
  static constexpr std::size_t kPadding = 0;
  static constexpr std::size_t kUnknown = 1;
  static constexpr std::string_view kPaddingToken = "PADDING";
  static constexpr std::string_view kUnknownToken = "UNKNOWN";

  Vocabulary();

  // Returns the index of the token, inserting it if new.
  std::size_t add(std::string_view token);
  std::optional<std::size_t> find(std::string_view token) const;
  // Falls back to kUnknown.
  std::size_t lookup(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }
  const std::string& token(std::size_t index) const { return tokens_.at(index); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // Rebuilds from an index-ordered token list (checkpoint loading). The first
  // two entries must be the reserved tokens.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Reserved tokens, then the four position indicators when requested, then
// training tokens in order of first occurrence, then pretrained tokens not
// seen in training.
Vocabulary build_vocabulary(std::span<const LabeledSentence> train,
                            std::span<const std::string> pretrained_tokens = {},
                            bool position_indicators = false);

}  // namespace relclass

#endif  // RELCLASS_CORPUS_H_
