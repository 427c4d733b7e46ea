#include <gtest/gtest.h>

#include <map>
#include <regex>

#include "flowco/augment.hpp"
#include "flowco/pymini/interpreter.hpp"
#include "flowco/pymini/parser.hpp"
#include "flowco/pymini/printer.hpp"
#include "support/program_gen.hpp"

using namespace flowco;
using pymini::Value;

namespace {

const std::string kAdd2 = "def add2(a, b):\n    return a + b\n";
const std::string kFact = "def fact(n):\n    if n <= 1:\n        return 1\n    return n * fact(n - 1)\n";

bool legal_name(const std::string& s, std::size_t lo, std::size_t hi) {
  static const std::regex grammar("[A-Za-z_][A-Za-z0-9_]*");
  static const std::set<std::string> reserved = {"False", "None",  "True",  "and",   "def",   "elif",  "else",
                                                 "for",   "if",    "in",    "not",   "or",    "return", "while",
                                                 "print", "range", "len",   "abs",   "min",   "max",   "pass",
                                                 "break", "class", "import", "lambda", "is",  "del",   "try"};
  return s.size() >= lo && s.size() <= hi && std::regex_match(s, grammar) && !reserved.count(s);
}

// Runs a program; failures map to their error kind so both sides compare.
std::string outcome(const pymini::Program& p, const std::vector<Value>& args) {
  try {
    const auto r = pymini::interpret(p, args);
    return r.return_value.repr() + "|" + r.printed;
  } catch (const Error& e) {
    return std::string("error ") + std::string(to_string(e.kind()));
  }
}

std::vector<DatasetRecord> train_records(std::size_t n, unsigned first_seed = 0) {
  std::vector<DatasetRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = pymini::parse(testgen::ProgramGen(first_seed + static_cast<unsigned>(i)).program());
    out.push_back(make_record(p, Provenance{"gen", std::nullopt, std::nullopt}, Split::Train));
  }
  return out;
}

}  // namespace

TEST(Rename, VariablesKeepsSemantics) {
  const auto p = pymini::parse(kAdd2);
  const auto r = rename_with_map(p, {AugmentMode::Variables, 7});
  EXPECT_EQ(r.program.name, "add2");
  ASSERT_EQ(r.program.params.size(), 2u);
  for (const auto& v : r.program.params) EXPECT_TRUE(legal_name(v, 1, 3)) << v;
  EXPECT_NE(r.program.params[0], r.program.params[1]);
  EXPECT_EQ(pymini::interpret(r.program, {Value::integer(2), Value::integer(3)}).return_value, Value::integer(5));
}

TEST(Rename, FunctionsLeavesVariables) {
  const auto p = pymini::parse(kFact);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto q = rename(p, {AugmentMode::Functions, seed});
    EXPECT_EQ(q.params, p.params);
    EXPECT_TRUE(legal_name(q.name, 4, 13)) << q.name;
    EXPECT_EQ(pymini::identifiers(q).variables, pymini::identifiers(p).variables);
    // The recursive call follows the definition.
    EXPECT_NE(pymini::print_canonical(q).find(q.name + "(n - 1)"), std::string::npos);
    EXPECT_EQ(pymini::interpret(q, {Value::integer(5)}).return_value, Value::integer(120));
  }
}

TEST(Rename, InverseMapRestoresOriginal) {
  for (unsigned seed = 0; seed < 100; ++seed) {
    const auto p = pymini::parse(testgen::ProgramGen(seed).program());
    const auto r = rename_with_map(p, {AugmentMode::Both, seed});
    std::map<std::string, std::string> vars, funcs;
    for (const auto& [from, to] : r.variables) ASSERT_TRUE(vars.emplace(to, from).second);
    for (const auto& [from, to] : r.functions) ASSERT_TRUE(funcs.emplace(to, from).second);
    EXPECT_EQ(pymini::print_canonical(pymini::apply_renaming(r.program, vars, funcs)), pymini::print_canonical(p));
  }
}

TEST(Rename, NamesObeyBoundsAndGrammar) {
  for (unsigned seed = 0; seed < 300; ++seed) {
    const auto p = pymini::parse(testgen::ProgramGen(seed).program());
    const auto r = rename_with_map(p, {AugmentMode::Both, seed * 31u + 1});
    for (const auto& [_, v] : r.variables) EXPECT_TRUE(legal_name(v, 1, 3)) << v;
    for (const auto& [_, f] : r.functions) EXPECT_TRUE(legal_name(f, 4, 13)) << f;
    EXPECT_EQ(r.variables.size(), pymini::identifiers(p).variables.size());
  }
}

TEST(Rename, NoCollisionWithUntouchedNames) {
  for (unsigned seed = 0; seed < 200; ++seed) {
    const auto p = pymini::parse(testgen::ProgramGen(seed).program());
    const auto vars = pymini::identifiers(p).variables;
    const auto q = rename(p, {AugmentMode::Functions, seed});
    EXPECT_FALSE(vars.count(q.name)) << q.name;
    const auto q2 = rename(p, {AugmentMode::Variables, seed});
    EXPECT_FALSE(pymini::identifiers(q2).variables.count(p.name));
    EXPECT_EQ(pymini::identifiers(q2).variables.size(), vars.size());
  }
}

TEST(Rename, Deterministic) {
  const auto p = pymini::parse(testgen::ProgramGen(3).program());
  EXPECT_EQ(rename(p, {AugmentMode::Both, 99}), rename(p, {AugmentMode::Both, 99}));
}

TEST(Rename, PreservesBehaviourOnArgumentBattery) {
  for (unsigned seed = 0; seed < 150; ++seed) {
    const auto p = pymini::parse(testgen::ProgramGen(seed).program());
    for (auto mode : kAugmentModes) {
      const auto q = rename(p, {mode, seed});
      for (int v = 0; v < 20; ++v) {
        std::vector<Value> args;
        for (std::size_t k = 0; k < p.params.size(); ++k) args.push_back(Value::integer((v * 7 + 3 * static_cast<int>(k)) % 19 - 9));
        EXPECT_EQ(outcome(p, args), outcome(q, args));
      }
    }
  }
}

TEST(AugmentCorpus, Empty) { EXPECT_TRUE(augment_corpus({}, 1).empty()); }

TEST(AugmentCorpus, FiveBecomeTwenty) {
  const auto in = train_records(5);
  const auto out = augment_corpus(in, 11);
  ASSERT_EQ(out.size(), 20u);
  std::map<std::string, int> modes;
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(out[i], in[i]);
  for (std::size_t i = 5; i < out.size(); ++i) {
    const auto& r = out[i];
    ASSERT_TRUE(r.provenance.aug_mode.has_value());
    ++modes[*r.provenance.aug_mode];
    EXPECT_EQ(r.provenance.parent_id, in[(i - 5) / 3].id);
    EXPECT_EQ(r.split, Split::Train);
    EXPECT_EQ(r.graph, lower(pymini::parse(r.code)));
    EXPECT_EQ(r.enc_modified, encode(r.graph, EncodingVariant::ModifiedString));
  }
  EXPECT_EQ(modes, (std::map<std::string, int>{{"functions", 5}, {"variables", 5}, {"both", 5}}));
}

TEST(AugmentCorpus, DeterministicAndSeedSensitive) {
  const auto in = train_records(4, 40);
  EXPECT_EQ(augment_corpus(in, 5), augment_corpus(in, 5));
  EXPECT_NE(augment_corpus(in, 5), augment_corpus(in, 6));
}

TEST(AugmentCorpus, RejectsNonTrain) {
  auto in = train_records(2);
  in[1].split = Split::Test;
  try {
    augment_corpus(in, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SplitLeakage);
  }
}
