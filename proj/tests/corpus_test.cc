#include "relclass/corpus.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "relclass/io.h"
#include "test_util.h"

namespace relclass {
namespace {

using testing::data_path;
using testing::uniform_size;

TEST(Labels, AllIdsRoundTripThroughCodecAndText) {
  std::set<std::string> names;
  for (std::size_t id = 0; id < kNumLabels; ++id) {
    const RelationLabel l = RelationLabel::from_id(id);
    EXPECT_EQ(l.id(), id);
    const auto parsed = RelationLabel::parse(l.to_string());
    ASSERT_TRUE(parsed.has_value()) << l.to_string();
    EXPECT_EQ(*parsed, l);
    names.insert(l.to_string());
  }
  EXPECT_EQ(names.size(), kNumLabels);
  EXPECT_EQ(RelationLabel::from_id(kOtherId).to_string(), "Other");
  EXPECT_EQ(RelationLabel::from_id(1).to_string(), "Cause-Effect(e2,e1)");
  EXPECT_EQ(RelationLabel::parse("Message-Topic(e1,e2)")->id(), 16u);
}

TEST(Labels, RejectsUnknownSpellings) {
  EXPECT_FALSE(RelationLabel::parse("Cause-Effect").has_value());
  EXPECT_FALSE(RelationLabel::parse("Cause-Effect(e1,e3)").has_value());
  EXPECT_FALSE(RelationLabel::parse("Other(e1,e2)").has_value());
  EXPECT_FALSE(RelationLabel::parse("cause-effect(e1,e2)").has_value());
  EXPECT_THROW(RelationLabel::from_id(19), std::out_of_range);
}

TEST(Tokenize, GoldenCases) {
  std::istringstream in(read_text_file(data_path("tokenizer_golden.tsv")));
  std::string line;
  int cases = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string field;
    while (std::getline(ls, field, '\t')) f.push_back(field);
    ASSERT_EQ(f.size(), 4u) << line;
    const TokenizedSentence t = tokenize(f[0]);
    const LabeledSentence expected =
        testing::sentence(0, f[1], Span{std::stoul(f[2]), std::stoul(f[2].substr(f[2].find(':') + 1))},
                          Span{std::stoul(f[3]), std::stoul(f[3].substr(f[3].find(':') + 1))});
    EXPECT_EQ(t.tokens, expected.tokens) << f[0];
    EXPECT_EQ(t.e1, expected.e1) << f[0];
    EXPECT_EQ(t.e2, expected.e2) << f[0];
    ++cases;
  }
  EXPECT_EQ(cases, 5);
}

TEST(Tokenize, RejectsBadTags) {
  EXPECT_THROW(tokenize("no tags here"), ParseError);
  EXPECT_THROW(tokenize("<e2>b</e2> before <e1>a</e1>"), ParseError);
  EXPECT_THROW(tokenize("<e1><e2>x</e2></e1>"), ParseError);
  EXPECT_THROW(tokenize("<e1></e1> empty <e2>x</e2>"), ParseError);
  EXPECT_THROW(tokenize("<e1>a</e1> <e2>b</e2> <e1>c</e1>"), ParseError);
  EXPECT_THROW(tokenize("<e1>a</e1> only one"), ParseError);
}

constexpr const char* kTwoRecords =
    "1\t\"The <e1>storm</e1> caused a <e2>flood</e2>.\"\n"
    "Cause-Effect(e1,e2)\n"
    "Comment: obvious\n"
    "\n"
    "2\t\"A <e1>bottle</e1> of <e2>wine</e2>.\"\n"
    "Other\n"
    "Comment:\n"
    "\n";

TEST(ParseSemeval, ParsesRecords) {
  const auto s = parse_semeval_file(kTwoRecords);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].id, 1);
  EXPECT_EQ(s[0].tokens, (std::vector<std::string>{"the", "storm", "caused", "a", "flood", "."}));
  EXPECT_EQ(s[0].e1, (Span{1, 1}));
  EXPECT_EQ(s[0].e2, (Span{4, 4}));
  EXPECT_EQ(s[0].label.to_string(), "Cause-Effect(e1,e2)");
  EXPECT_TRUE(s[1].label.is_other());
}

TEST(ParseSemeval, ErrorsNameRecordAndLine) {
  const std::string dup = std::string(kTwoRecords) +
                          "2\t\"Again <e1>a</e1> <e2>b</e2>\"\nOther\nComment:\n\n";
  try {
    parse_semeval_file(dup);
    FAIL() << "duplicate id accepted";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("record 2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 9"), std::string::npos);
  }
  try {
    parse_semeval_file("7\t\"<e1>a</e1> x <e2>b</e2>\"\nCause-Effect(e1,e3)\n\n");
    FAIL() << "unknown relation accepted";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown relation"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("record 7"), std::string::npos);
  }
  EXPECT_THROW(parse_semeval_file("7\t\"<e1>a</e1> x <e2>b</e2>\"\n\n"), ParseError);
  EXPECT_THROW(parse_semeval_file("7\t\"<e1>a</e1> x\"\nOther\n\n"), ParseError);
}

TEST(ParseSemeval, UnlabeledRecordsWhenAllowed) {
  const std::string text = "8001\t\"<e1>a</e1> x <e2>b</e2>\"\n8002\t\"<e1>c</e1> <e2>d</e2>\"\n";
  EXPECT_THROW(parse_semeval_file(text), ParseError);
  const auto s = parse_semeval_file(text, ParseOptions{.allow_unlabeled = true});
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[1].id, 8002);
  EXPECT_TRUE(s[1].label.is_other());
}

TEST(ParseSemeval, EmptyInputGivesNoSentences) {
  EXPECT_TRUE(parse_semeval_file("").empty());
  EXPECT_TRUE(parse_semeval_file("\n\n").empty());
}

// Random sentences whose tokens survive re-tokenization unchanged.
std::vector<LabeledSentence> random_corpus(std::size_t n, std::mt19937_64& rng) {
  const std::vector<std::string> vocab = {"a", "bc", "the", "x-ray", "u.s", "9.30", ",",
                                          ".", "(", ")", "don't", "alpha", "beta"};
  std::vector<LabeledSentence> out;
  for (std::size_t i = 0; i < n; ++i) {
    LabeledSentence s;
    s.id = static_cast<std::int64_t>(100 + i * 3);
    const std::size_t len = uniform_size(rng, 2, 15);
    for (std::size_t t = 0; t < len; ++t) s.tokens.push_back(vocab[uniform_size(rng, 0, 12)]);
    s.e1.first = uniform_size(rng, 0, len - 2);
    s.e1.last = uniform_size(rng, s.e1.first, len - 2);
    s.e2.first = uniform_size(rng, s.e1.last + 1, len - 1);
    s.e2.last = uniform_size(rng, s.e2.first, len - 1);
    s.label = RelationLabel::from_id(uniform_size(rng, 0, kNumLabels - 1));
    out.push_back(std::move(s));
  }
  return out;
}

TEST(ParseSemeval, RoundTripProperty) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto corpus = random_corpus(25, rng);
    EXPECT_EQ(parse_semeval_file(to_semeval_text(corpus)), corpus);
    EXPECT_EQ(parse_corpus_cache(to_corpus_cache(corpus)), corpus);
  }
}

TEST(CorpusCache, DetectionAndErrors) {
  std::mt19937_64 rng(12);
  const auto corpus = random_corpus(3, rng);
  EXPECT_TRUE(looks_like_corpus_cache(to_corpus_cache(corpus)));
  EXPECT_FALSE(looks_like_corpus_cache(to_semeval_text(corpus)));
  EXPECT_THROW(parse_corpus_cache("1\tOther\ta b\t0:0\n"), ParseError);
  EXPECT_THROW(parse_corpus_cache("1\tOther\ta b\t1:1\t0:0\n"), ParseError);
  EXPECT_THROW(parse_corpus_cache("1\tNope\ta b\t0:0\t1:1\n"), ParseError);
}

TEST(ReadCorpusFile, SyntheticCorpusParses) {
  const auto s = read_corpus_file(data_path("synthetic_train.txt"));
  EXPECT_EQ(s.size(), 400u);
  for (const auto& x : s) EXPECT_NO_THROW(validate_spans(x));
  EXPECT_THROW(read_corpus_file(data_path("does_not_exist.txt")), ParseError);
}

TEST(SplitTrainDev, SizesDisjointnessAndDeterminism) {
  std::vector<LabeledSentence> corpus(8000);
  for (std::size_t i = 0; i < corpus.size(); ++i) corpus[i].id = static_cast<std::int64_t>(i + 1);
  const auto [train, dev] = split_train_dev(corpus, 1500, 42);
  EXPECT_EQ(train.size(), 6500u);
  EXPECT_EQ(dev.size(), 1500u);
  std::set<std::int64_t> ids;
  for (const auto& s : train) ids.insert(s.id);
  for (const auto& s : dev) ids.insert(s.id);
  EXPECT_EQ(ids.size(), 8000u);
  auto ordered = [](const std::vector<LabeledSentence>& v) {
    return std::is_sorted(v.begin(), v.end(),
                          [](const auto& a, const auto& b) { return a.id < b.id; });
  };
  EXPECT_TRUE(ordered(train));
  EXPECT_TRUE(ordered(dev));
  const auto again = split_train_dev(corpus, 1500, 42);
  EXPECT_EQ(again.second, dev);
  EXPECT_NE(split_train_dev(corpus, 1500, 43).second, dev);
}

TEST(SplitTrainDev, EdgeCases) {
  std::vector<LabeledSentence> corpus(10);
  const auto [all, none] = split_train_dev(corpus, 0, 1);
  EXPECT_EQ(all.size(), 10u);
  EXPECT_TRUE(none.empty());
  EXPECT_THROW(split_train_dev(corpus, 10, 1), std::invalid_argument);
  EXPECT_THROW(split_train_dev(corpus, 11, 1), std::invalid_argument);
}

TEST(Vocabulary, ReservedTokensAndOrder) {
  const Vocabulary empty = build_vocabulary({});
  EXPECT_EQ(empty.size(), 2u);
  EXPECT_EQ(empty.token(Vocabulary::kPadding), "PADDING");
  EXPECT_EQ(empty.token(Vocabulary::kUnknown), "UNKNOWN");

  const std::vector<LabeledSentence> train = {
      testing::sentence(1, "b a b c", {0, 0}, {2, 3}),
      testing::sentence(2, "d a", {0, 0}, {1, 1}),
  };
  const std::vector<std::string> pretrained = {"z", "a", "y"};
  const Vocabulary v = build_vocabulary(train, pretrained, true);
  EXPECT_EQ(v.tokens(), (std::vector<std::string>{"PADDING", "UNKNOWN", "<e1>", "</e1>", "<e2>",
                                                  "</e2>", "b", "a", "c", "d", "z", "y"}));
  EXPECT_EQ(v.lookup("never-seen"), Vocabulary::kUnknown);
  EXPECT_EQ(v.lookup("c"), 8u);
  EXPECT_EQ(Vocabulary::from_tokens(v.tokens()), v);
  EXPECT_THROW(Vocabulary::from_tokens({"a", "b"}), std::invalid_argument);
}

}  // namespace
}  // namespace relclass
