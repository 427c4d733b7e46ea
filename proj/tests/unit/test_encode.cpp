#include <gtest/gtest.h>

#include "flowco/code2flow.hpp"
#include "flowco/encode.hpp"
#include "flowco/pymini/parser.hpp"
#include "support/fixtures.hpp"
#include "support/program_gen.hpp"

using namespace flowco;

TEST(Encode, Fun1ReferenceTuple) { EXPECT_EQ(encode(fixtures::fun1_reference_graph(), EncodingVariant::Tuple), fixtures::kFun1Tuple); }

TEST(Encode, Fun1ReferenceString) {
  EXPECT_EQ(encode(fixtures::fun1_reference_graph(), EncodingVariant::String), fixtures::kFun1String);
}

TEST(Encode, Fun1ReferenceModified) {
  EXPECT_EQ(encode(fixtures::fun1_reference_graph(), EncodingVariant::ModifiedString), fixtures::kFun1Modified);
}

TEST(Encode, LoweredFun1DiffersOnlyInParameterCase) {
  const auto g = lower(pymini::parse(fixtures::kFun1Source));
  auto expected = fixtures::kFun1Modified;
  expected.replace(expected.find("input: X"), 8, "input: x");
  EXPECT_EQ(encode(g, EncodingVariant::ModifiedString), expected);
}

TEST(Encode, InvalidGraph) {
  FlowGraph empty;
  try {
    encode(empty, EncodingVariant::Tuple);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidGraph);
  }
}

TEST(Encode, VariantNames) {
  EXPECT_EQ(variant_from_name("tuple"), EncodingVariant::Tuple);
  EXPECT_EQ(variant_from_name("string"), EncodingVariant::String);
  EXPECT_EQ(variant_from_name("modified"), EncodingVariant::ModifiedString);
  EXPECT_FALSE(variant_from_name("json").has_value());
}

TEST(Decode, Fun1Reference) {
  const auto pairs = decode_modified(fixtures::kFun1Modified);
  ASSERT_EQ(pairs.size(), 5u);
  EXPECT_EQ(pairs[0].first, "start fun1");
  EXPECT_EQ(pairs[0].second, "OVAL");
  EXPECT_EQ(pairs[2].first, "y = ((16 + x) - 20)");
  EXPECT_EQ(pairs[4].first, "end function return");
  EXPECT_EQ(pairs[4].second, "OVAL");
}

TEST(Decode, SingleBlock) {
  const auto pairs = decode_modified("foo, OVAL");
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].first, "foo");
  EXPECT_EQ(pairs[0].second, "OVAL");
}

TEST(Decode, TextWithCommas) {
  const auto pairs = decode_modified("output: print(a, b), PARALLELOGRAM");
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].first, "output: print(a, b)");
}

TEST(Decode, UnknownShape) {
  for (const char* bad : {"foo, CIRCLE", "foo OVAL", "foo, OVAL [SEP] bar", "foo, oval"}) {
    try {
      decode_modified(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::MalformedEncoding) << bad;
    }
  }
}

TEST(Decode, EmptyText) { EXPECT_TRUE(decode_modified("").empty()); }

TEST(Decode, InvertsEncodeOnGeneratedPrograms) {
  for (unsigned seed = 0; seed < 300; ++seed) {
    const auto g = lower(pymini::parse(testgen::ProgramGen(seed).program()));
    const auto text = encode(g, EncodingVariant::ModifiedString);
    const auto order = linearize(g);
    const auto pairs = decode_modified(text);
    ASSERT_EQ(pairs.size(), order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      EXPECT_EQ(pairs[i].first, order[i].text);
      EXPECT_EQ(pairs[i].second, shape_token(order[i].kind));
    }
    std::size_t tokens = 0;
    for (const char* tok : {"OVAL", "RECTANGLE", "PARALLELOGRAM", "DIAMOND"}) {
      for (auto pos = text.find(tok); pos != std::string::npos; pos = text.find(tok, pos + 1)) ++tokens;
    }
    EXPECT_EQ(tokens, g.nodes.size());
  }
}
