#include <gtest/gtest.h>

#include "flowco/augment.hpp"
#include "flowco/maskgen.hpp"
#include "flowco/pymini/parser.hpp"
#include "support/fixtures.hpp"
#include "support/program_gen.hpp"

using namespace flowco;

using Tokens = std::vector<std::string>;

namespace {

std::vector<DatasetRecord> train_records(std::size_t n) {
  std::vector<DatasetRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = pymini::parse(testgen::ProgramGen(static_cast<unsigned>(i) + 500).program());
    out.push_back(make_record(p, Provenance{"gen", std::nullopt, std::nullopt}, Split::Train));
  }
  return out;
}

}  // namespace

TEST(WordTokenize, SpecExamples) {
  EXPECT_EQ(word_tokenize("start fun1, OVAL [SEP]"), (Tokens{"start", "fun1", ",", "OVAL", "[SEP]"}));
  EXPECT_TRUE(word_tokenize("").empty());
  EXPECT_EQ(word_tokenize("[MASK]"), (Tokens{"[MASK]"}));
}

TEST(WordTokenize, PunctuationAndStrings) {
  EXPECT_EQ(word_tokenize("y = ((16 + x) - 20)"), (Tokens{"y", "=", "(", "(", "16", "+", "x", ")", "-", "20", ")"}));
  EXPECT_EQ(word_tokenize("print(\"a, b\", x)"), (Tokens{"print", "(", "\"a, b\"", ",", "x", ")"}));
  EXPECT_EQ(word_tokenize("a[SEP]b"), (Tokens{"a", "[SEP]", "b"}));
}

TEST(Mask, ZeroProbabilityIsIdentity) {
  const Tokens t = word_tokenize(fixtures::kFun1Modified);
  const auto s = mask(t, 0.0, 3);
  EXPECT_EQ(s.masked, t);
  EXPECT_TRUE(s.mask_positions.empty());
}

TEST(Mask, FullProbabilitySparesSep) {
  const Tokens t{"start", "fun1", ",", "OVAL", "[SEP]"};
  const auto s = mask(t, 1.0, 3);
  EXPECT_EQ(s.masked, (Tokens{"[MASK]", "[MASK]", "[MASK]", "[MASK]", "[SEP]"}));
  EXPECT_EQ(s.mask_positions, (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(Mask, RejectsBadProbability) {
  EXPECT_THROW(mask({"a"}, 1.5, 0), Error);
  EXPECT_THROW(mask({"a"}, -0.1, 0), Error);
}

TEST(Mask, FractionAndReconstruction) {
  std::size_t total = 0, masked = 0;
  std::uint64_t seed = 0;
  while (total < 100'000) {
    const auto t = word_tokenize(fixtures::kFun1Modified);
    const auto s = mask(t, 0.15, seed++);
    ASSERT_EQ(s.masked.size(), t.size());
    EXPECT_EQ(reconstruct(s), t);
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] == "[SEP]") {
        EXPECT_EQ(s.masked[i], "[SEP]");
        continue;
      }
      ++total;
      if (s.masked[i] == "[MASK]") ++masked;
    }
  }
  const double frac = static_cast<double>(masked) / static_cast<double>(total);
  EXPECT_GE(frac, 0.14);
  EXPECT_LE(frac, 0.16);
}

TEST(Mask, DeterministicAndSeedSensitive) {
  Tokens t(400, "tok");
  EXPECT_EQ(mask(t, 0.15, 9).mask_positions, mask(t, 0.15, 9).mask_positions);
  EXPECT_NE(mask(t, 0.15, 9).mask_positions, mask(t, 0.15, 10).mask_positions);
}

TEST(PretrainSample, SpansPointAtMaskedWords) {
  const std::string text = "y = ((16 + x) - 20)";
  const auto s = make_pretrain_sample(SampleSource::Code, text, 1.0, 1);
  EXPECT_EQ(s.masked, "[MASK] [MASK] [MASK][MASK][MASK] [MASK] [MASK][MASK] [MASK] [MASK][MASK]");
  ASSERT_EQ(s.mask_spans.size(), 11u);
  EXPECT_EQ(s.mask_spans[0], (std::pair<std::size_t, std::size_t>{0, 1}));
  EXPECT_EQ(s.mask_spans[4], (std::pair<std::size_t, std::size_t>{6, 8}));
  for (std::size_t i = 0; i < s.mask_spans.size(); ++i) {
    const auto [b, e] = s.mask_spans[i];
    EXPECT_EQ(text.substr(b, e - b), s.tokens.original[s.tokens.mask_positions[i]]);
  }
}

TEST(PretrainSample, JsonShape) {
  const auto s = make_pretrain_sample(SampleSource::Encoding, "foo, OVAL [SEP] bar, OVAL", 1.0, 2);
  const auto j = to_json(s);
  EXPECT_EQ(j["source"], "encoding");
  EXPECT_EQ(j["original"], "foo, OVAL [SEP] bar, OVAL");
  EXPECT_EQ(j["masked"], "[MASK][MASK] [MASK] [SEP] [MASK][MASK] [MASK]");
  EXPECT_EQ(j["mask_spans"].dump(), "[[0,3],[3,4],[5,9],[16,19],[19,20],[21,25]]");
}

TEST(PretrainCorpus, Counts) {
  EXPECT_TRUE(build_pretrain_corpus({}, {}, 0.15, 1).empty());
  const auto originals = train_records(12);
  const auto all = augment_corpus(originals, 4);
  const std::vector<DatasetRecord> augmented(all.begin() + 12, all.end());
  const auto samples = build_pretrain_corpus(originals, augmented, 0.15, 1);
  // originals + 3x augmented codes + one encoding per original
  EXPECT_EQ(samples.size(), 12u + 36u + 12u);
  std::size_t encodings = 0;
  for (const auto& s : samples) encodings += s.source == SampleSource::Encoding;
  EXPECT_EQ(encodings, 12u);
}

TEST(PretrainCorpus, LeakageGuard) {
  auto originals = train_records(3);
  originals[2].split = Split::Val;
  try {
    build_pretrain_corpus(originals, {}, 0.15, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SplitLeakage);
  }
}
