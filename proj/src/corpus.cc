#include "relclass/corpus.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace relclass {
namespace {

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (static_cast<unsigned char>(c) < 128) c = static_cast<char>(std::tolower(c));
  }
  return out;
}

void append_word_tokens(std::string_view word, std::vector<std::string>& out) {
  std::size_t begin = 0;
  std::size_t end = word.size();
  while (begin < end && is_punct(word[begin])) {
    out.emplace_back(1, word[begin]);
    ++begin;
  }
  std::vector<std::string> trailing;
  while (end > begin && is_punct(word[end - 1])) {
    trailing.emplace_back(1, word[end - 1]);
    --end;
  }
  if (end > begin) out.push_back(lowercase(word.substr(begin, end - begin)));
  out.insert(out.end(), trailing.rbegin(), trailing.rend());
}

void append_segment_tokens(std::string_view segment, std::vector<std::string>& out) {
  std::size_t i = 0;
  while (i < segment.size()) {
    while (i < segment.size() && is_space(segment[i])) ++i;
    std::size_t j = i;
    while (j < segment.size() && !is_space(segment[j])) ++j;
    if (j > i) append_word_tokens(segment.substr(i, j - i), out);
    i = j;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == text.size()) break;
    start = nl + 1;
  }
  return lines;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_size(std::string_view s, std::size_t& out) {
  std::int64_t v = 0;
  if (!parse_int(s, v) || v < 0) return false;
  out = static_cast<std::size_t>(v);
  return true;
}

// "<id>\t..." with a numeric id.
bool split_sentence_line(std::string_view line, std::int64_t& id, std::string_view& rest) {
  std::size_t k = 0;
  while (k < line.size() && !is_space(line[k])) ++k;
  if (k == 0 || k == line.size()) return false;
  if (!parse_int(line.substr(0, k), id)) return false;
  rest = trim(line.substr(k));
  return true;
}

std::string where(std::size_t line_no, std::int64_t id) {
  return "line " + std::to_string(line_no) + " (record " + std::to_string(id) + ")";
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

bool parse_span(std::string_view s, Span& span) {
  const std::size_t colon = s.find(':');
  if (colon == std::string_view::npos) return false;
  return parse_size(s.substr(0, colon), span.first) &&
         parse_size(s.substr(colon + 1), span.last);
}

std::string tagged_sentence(const LabeledSentence& s) {
  std::string out;
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    if (i > 0) out += ' ';
    if (i == s.e1.first) out += kE1Open;
    if (i == s.e2.first) out += kE2Open;
    out += s.tokens[i];
    if (i == s.e1.last) out += kE1Close;
    if (i == s.e2.last) out += kE2Close;
  }
  return out;
}

}  // namespace

void validate_spans(const LabeledSentence& s) {
  const std::size_t n = s.tokens.size();
  auto fail = [&](const std::string& why) {
    throw ParseError("record " + std::to_string(s.id) + ": " + why);
  };
  if (s.e1.first > s.e1.last) fail("empty e1 span");
  if (s.e2.first > s.e2.last) fail("empty e2 span");
  if (s.e1.last >= n || s.e2.last >= n) fail("entity span out of bounds");
  if (s.e1.last >= s.e2.first) fail("e1 must end before e2 starts");
}

TokenizedSentence tokenize(std::string_view raw) {
  static constexpr std::array<std::string_view, 4> kTags = {kE1Open, kE1Close, kE2Open,
                                                            kE2Close};
  TokenizedSentence out;
  // Expected tag order: <e1> </e1> <e2> </e2>.
  int next_tag = 0;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t found = std::string_view::npos;
    int which = -1;
    for (int t = 0; t < 4; ++t) {
      std::size_t f = raw.find(kTags[t], pos);
      if (f < found) {
        found = f;
        which = t;
      }
    }
    append_segment_tokens(raw.substr(pos, found == std::string_view::npos
                                              ? std::string_view::npos
                                              : found - pos),
                          out.tokens);
    if (which < 0) break;
    if (which != next_tag) {
      throw ParseError("entity tag " + std::string(kTags[which]) +
                       " is nested, repeated or out of order");
    }
    switch (which) {
      case 0: out.e1.first = out.tokens.size(); break;
      case 1:
        if (out.tokens.size() == out.e1.first) throw ParseError("empty <e1> entity");
        out.e1.last = out.tokens.size() - 1;
        break;
      case 2: out.e2.first = out.tokens.size(); break;
      case 3:
        if (out.tokens.size() == out.e2.first) throw ParseError("empty <e2> entity");
        out.e2.last = out.tokens.size() - 1;
        break;
    }
    ++next_tag;
    pos = found + kTags[which].size();
  }
  if (next_tag != 4) {
    throw ParseError("sentence needs exactly one <e1>...</e1> followed by <e2>...</e2>");
  }
  return out;
}

std::vector<LabeledSentence> parse_semeval_file(std::string_view text,
                                                const ParseOptions& options) {
  const auto lines = split_lines(text);
  std::vector<LabeledSentence> out;
  std::set<std::int64_t> seen;
  std::size_t i = 0;
  while (i < lines.size()) {
    if (trim(lines[i]).empty()) {
      ++i;
      continue;
    }
    const std::size_t line_no = i + 1;
    LabeledSentence s;
    std::string_view quoted;
    if (!split_sentence_line(lines[i], s.id, quoted)) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected '<id>\\t\"<sentence>\"'");
    }
    if (!seen.insert(s.id).second) throw ParseError(where(line_no, s.id) + ": duplicate id");
    if (quoted.size() >= 2 && quoted.front() == '"' && quoted.back() == '"') {
      quoted = quoted.substr(1, quoted.size() - 2);
    }
    try {
      TokenizedSentence t = tokenize(quoted);
      s.tokens = std::move(t.tokens);
      s.e1 = t.e1;
      s.e2 = t.e2;
    } catch (const ParseError& e) {
      throw ParseError(where(line_no, s.id) + ": " + e.what());
    }
    ++i;

    std::string_view label_line = i < lines.size() ? trim(lines[i]) : std::string_view{};
    std::int64_t next_id = 0;
    std::string_view unused;
    const bool missing = label_line.empty() || split_sentence_line(lines[i], next_id, unused);
    if (missing) {
      if (!options.allow_unlabeled) {
        throw ParseError(where(line_no, s.id) + ": missing relation line");
      }
      s.label = RelationLabel::other();
    } else {
      auto label = RelationLabel::parse(label_line);
      if (!label) {
        throw ParseError(where(i + 1, s.id) + ": unknown relation '" +
                         std::string(label_line) + "'");
      }
      s.label = *label;
      ++i;
    }
    if (i < lines.size() && trim(lines[i]).starts_with("Comment")) ++i;
    validate_spans(s);
    out.push_back(std::move(s));
  }
  return out;
}

std::string to_semeval_text(std::span<const LabeledSentence> sentences) {
  std::string out;
  for (const auto& s : sentences) {
    out += std::to_string(s.id);
    out += "\t\"";
    out += tagged_sentence(s);
    out += "\"\n";
    out += s.label.to_string();
    out += "\nComment:\n\n";
  }
  return out;
}

std::string to_corpus_cache(std::span<const LabeledSentence> sentences) {
  std::ostringstream os;
  for (const auto& s : sentences) {
    os << s.id << '\t' << s.label.to_string() << '\t';
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      if (i > 0) os << ' ';
      os << s.tokens[i];
    }
    os << '\t' << s.e1.first << ':' << s.e1.last << '\t' << s.e2.first << ':' << s.e2.last
       << '\n';
  }
  return os.str();
}

std::vector<LabeledSentence> parse_corpus_cache(std::string_view text) {
  std::vector<LabeledSentence> out;
  std::set<std::int64_t> seen;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto fields = split_tabs(lines[i]);
    const std::string at = "line " + std::to_string(i + 1);
    if (fields.size() != 5) throw ParseError(at + ": expected 5 tab-separated fields");
    LabeledSentence s;
    if (!parse_int(fields[0], s.id)) throw ParseError(at + ": bad id");
    if (!seen.insert(s.id).second) throw ParseError(where(i + 1, s.id) + ": duplicate id");
    auto label = RelationLabel::parse(fields[1]);
    if (!label) {
      throw ParseError(where(i + 1, s.id) + ": unknown relation '" + std::string(fields[1]) +
                       "'");
    }
    s.label = *label;
    std::string_view toks = fields[2];
    std::size_t start = 0;
    while (start <= toks.size()) {
      std::size_t sp = toks.find(' ', start);
      if (sp == std::string_view::npos) sp = toks.size();
      if (sp > start) s.tokens.emplace_back(toks.substr(start, sp - start));
      start = sp + 1;
    }
    if (!parse_span(fields[3], s.e1) || !parse_span(fields[4], s.e2)) {
      throw ParseError(where(i + 1, s.id) + ": bad span field");
    }
    validate_spans(s);
    out.push_back(std::move(s));
  }
  return out;
}

bool looks_like_corpus_cache(std::string_view text) {
  for (auto line : split_lines(text)) {
    if (trim(line).empty()) continue;
    return split_tabs(line).size() == 5;
  }
  return false;
}

std::vector<LabeledSentence> read_corpus_file(const std::string& path,
                                              const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open corpus file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    if (looks_like_corpus_cache(text)) return parse_corpus_cache(text);
    return parse_semeval_file(text, options);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::pair<std::vector<LabeledSentence>, std::vector<LabeledSentence>> split_train_dev(
    std::span<const LabeledSentence> sentences, std::size_t dev_size, std::uint64_t seed) {
  if (dev_size > 0 && dev_size >= sentences.size()) {
    throw std::invalid_argument("dev size " + std::to_string(dev_size) +
                                " must be smaller than the corpus (" +
                                std::to_string(sentences.size()) + " sentences)");
  }
  std::vector<std::size_t> order(sentences.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> in_dev(sentences.size(), false);
  for (std::size_t k = 0; k < dev_size; ++k) in_dev[order[k]] = true;

  std::pair<std::vector<LabeledSentence>, std::vector<LabeledSentence>> out;
  out.first.reserve(sentences.size() - dev_size);
  out.second.reserve(dev_size);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    (in_dev[i] ? out.second : out.first).push_back(sentences[i]);
  }
  return out;
}

Vocabulary::Vocabulary() {
  add(kPaddingToken);
  add(kUnknownToken);
}

std::size_t Vocabulary::add(std::string_view token) {
  auto [it, inserted] = index_.try_emplace(std::string(token), tokens_.size());
  if (inserted) tokens_.emplace_back(token);
  return it->second;
}

std::optional<std::size_t> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::lookup(std::string_view token) const {
  return find(token).value_or(kUnknown);
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2 || tokens[0] != kPaddingToken || tokens[1] != kUnknownToken) {
    throw std::invalid_argument("vocabulary must start with the reserved tokens");
  }
  Vocabulary v;
  for (std::size_t i = 2; i < tokens.size(); ++i) {
    if (v.add(tokens[i]) != i) {
      throw std::invalid_argument("duplicate vocabulary token '" + tokens[i] + "'");
    }
  }
  return v;
}

Vocabulary build_vocabulary(std::span<const LabeledSentence> train,
                            std::span<const std::string> pretrained_tokens,
                            bool position_indicators) {
  Vocabulary v;
  if (position_indicators) {
    for (auto tag : {kE1Open, kE1Close, kE2Open, kE2Close}) v.add(tag);
  }
  for (const auto& s : train) {
    for (const auto& t : s.tokens) v.add(t);
  }
  for (const auto& t : pretrained_tokens) v.add(t);
  return v;
}

}  // namespace relclass
