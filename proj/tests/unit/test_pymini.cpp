#include <gtest/gtest.h>

#include "flowco/pymini/analysis.hpp"
#include "flowco/pymini/interpreter.hpp"
#include "flowco/pymini/lexer.hpp"
#include "flowco/pymini/parser.hpp"
#include "flowco/pymini/printer.hpp"
#include "support/fixtures.hpp"
#include "support/program_gen.hpp"

using namespace flowco;
using namespace flowco::pymini;

namespace {

ErrorKind kind_of(const std::string& src) {
  try {
    parse(src);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "parsed: " << src;
  return ErrorKind::IoError;
}

std::int64_t run_int(const std::string& src, std::vector<std::int64_t> args) {
  std::vector<Value> vs;
  for (auto a : args) vs.push_back(Value::integer(a));
  return interpret(parse(src), vs).return_value.as_int();
}

}  // namespace

TEST(Lexer, IndentsAndTokens) {
  const auto toks = tokenize("def f(x):\n    return x // 2\n");
  std::vector<TokenKind> kinds;
  for (const auto& t : toks) kinds.push_back(t.kind);
  EXPECT_EQ(kinds, (std::vector<TokenKind>{TokenKind::Name, TokenKind::Name, TokenKind::Op, TokenKind::Name,
                                           TokenKind::Op, TokenKind::Op, TokenKind::Newline, TokenKind::Indent,
                                           TokenKind::Name, TokenKind::Name, TokenKind::Op, TokenKind::Int,
                                           TokenKind::Newline, TokenKind::Dedent, TokenKind::End}));
  EXPECT_EQ(toks[10].text, "//");
}

TEST(Lexer, StringKeepsQuotesInText) {
  const auto toks = tokenize("'a\\'b'");
  ASSERT_GE(toks.size(), 1u);
  EXPECT_EQ(toks[0].kind, TokenKind::String);
  EXPECT_EQ(toks[0].text, "'a\\'b'");
  EXPECT_EQ(toks[0].value, "a'b");
}

TEST(Parser, Fun1) {
  const auto p = parse(fixtures::kFun1Source);
  EXPECT_EQ(p.name, "fun1");
  EXPECT_EQ(p.params, std::vector<std::string>{"x"});
  ASSERT_EQ(p.body.size(), 2u);
  EXPECT_EQ(p.body[0].kind, StmtKind::Assign);
  EXPECT_EQ(p.body[1].kind, StmtKind::Return);
}

TEST(Parser, UnclosedParameterList) {
  try {
    parse("def f(");
    FAIL();
  } catch (const SourceError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SyntaxError);
    EXPECT_EQ(e.line(), 1);
    EXPECT_EQ(e.column(), 7);
  }
}

TEST(Parser, UnsupportedFeatures) {
  EXPECT_EQ(kind_of("def f(x):\n    import os\n"), ErrorKind::UnsupportedFeature);
  EXPECT_EQ(kind_of("class A:\n    x = 1\n"), ErrorKind::UnsupportedFeature);
  EXPECT_EQ(kind_of("def f(x):\n    return x\n    y = 1\n"), ErrorKind::UnsupportedFeature);
  EXPECT_EQ(kind_of("def f(x):\n    return [x]\n"), ErrorKind::UnsupportedFeature);
  EXPECT_EQ(kind_of("def f(x):\n    return x +\n"), ErrorKind::SyntaxError);
  EXPECT_EQ(kind_of("def f(x):\n  return x\n"), ErrorKind::SyntaxError);
}

TEST(Printer, PreservesParentheses) {
  const auto text = print_canonical(parse(fixtures::kFun1Source));
  EXPECT_EQ(text, fixtures::kFun1Source);
  EXPECT_NE(text.find("((16 + x) - 20)"), std::string::npos);
}

TEST(Printer, CanonicalSpacing) {
  EXPECT_EQ(print_canonical(parse("def f(a,b):\n    c=a+b*2\n    print(c,'x')\n    return -c\n")),
            "def f(a, b):\n    c = a + b * 2\n    print(c, \"x\")\n    return -c\n");
}

TEST(Printer, IdempotentOnGeneratedPrograms) {
  for (unsigned seed = 0; seed < 300; ++seed) {
    const std::string src = testgen::ProgramGen(seed).program();
    const auto once = print_canonical(parse(src));
    EXPECT_EQ(print_canonical(parse(once)), once) << src;
    EXPECT_EQ(parse(once), parse(src)) << src;
  }
}

TEST(Interpreter, Fun1) { EXPECT_EQ(run_int(fixtures::kFun1Source, {4}), 0); }

TEST(Interpreter, Factorial) {
  const std::string src =
      "def fact(n):\n    r = 1\n    while n > 1:\n        r = r * n\n        n = n - 1\n    return r\n";
  EXPECT_EQ(run_int(src, {5}), 120);
}

TEST(Interpreter, PythonDivisionAndModulo) {
  const std::string src = "def f(a, b):\n    return a // b * 100 + a % b\n";
  EXPECT_EQ(run_int(src, {-7, 2}), -4 * 100 + 1);
  EXPECT_EQ(run_int(src, {7, -2}), -4 * 100 - 1);
}

TEST(Interpreter, ForRangeAndPrint) {
  const auto p = parse("def f(n):\n    s = 0\n    for i in range(1, n, 2):\n        s += i\n        print(i, s)\n    return s\n");
  const auto r = interpret(p, {Value::integer(6)});
  EXPECT_EQ(r.return_value, Value::integer(9));
  EXPECT_EQ(r.printed, "1 1\n3 4\n5 9\n");
}

TEST(Interpreter, Errors) {
  auto kind = [](const std::string& src, std::vector<Value> args) {
    try {
      interpret(parse(src), args, 1000);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::IoError;
  };
  EXPECT_EQ(kind("def f():\n    while True:\n        x = 1\n    return 0\n", {}), ErrorKind::StepLimitExceeded);
  EXPECT_EQ(kind("def f(a):\n    return a // 0\n", {Value::integer(1)}), ErrorKind::DivisionByZero);
  EXPECT_EQ(kind("def f(a):\n    return a + 'x'\n", {Value::integer(1)}), ErrorKind::TypeMismatch);
  EXPECT_EQ(kind("def f(a):\n    return a * a\n", {Value::integer(4'000'000'000'000)}), ErrorKind::Overflow);
  EXPECT_EQ(kind("def f(a):\n    return a\n", {}), ErrorKind::ArityMismatch);
}

TEST(Interpreter, MissingReturnYieldsNone) {
  const auto r = interpret(parse("def f(a):\n    print(a)\n"), {Value::string("hi")});
  EXPECT_TRUE(r.return_value.is_none());
  EXPECT_EQ(r.printed, "hi\n");
}

TEST(Analysis, Identifiers) {
  const auto ids = identifiers(parse(fixtures::kFun1Source));
  EXPECT_EQ(ids.functions, (std::set<std::string>{"fun1"}));
  EXPECT_EQ(ids.variables, (std::set<std::string>{"x", "y"}));

  const auto ids2 = identifiers(parse("def g(s):\n    for i in range(len(s)):\n        t = abs(i)\n    return g(t)\n"));
  EXPECT_EQ(ids2.functions, (std::set<std::string>{"g"}));
  EXPECT_EQ(ids2.variables, (std::set<std::string>{"s", "i", "t"}));
}

TEST(Analysis, NormalizeDesugarsFor) {
  const auto p = normalize(parse("def f(n):\n    for i in range(n):\n        print(i)\n    return n\n"));
  EXPECT_EQ(print_canonical(p),
            "def f(n):\n    i = 0\n    while i < n:\n        print(i)\n        i += 1\n    return n\n");
}

TEST(Analysis, NormalizeSinksIntoOpenBranch) {
  const auto p = normalize(parse(
      "def f(a):\n    if a > 0:\n        return 1\n    elif a < -5:\n        a = 0\n    a += 1\n    return a\n"));
  EXPECT_EQ(print_canonical(p),
            "def f(a):\n    if a > 0:\n        return 1\n    else:\n        if a < -5:\n            a = 0\n"
            "        a += 1\n        return a\n");
}

TEST(Analysis, NormalizePreservesBehaviour) {
  for (unsigned seed = 0; seed < 200; ++seed) {
    const auto p = parse(testgen::ProgramGen(seed).program());
    const auto q = normalize(p);
    EXPECT_EQ(normalize(q), q);
    for (std::int64_t a = -3; a <= 3; ++a) {
      std::vector<Value> args(p.params.size(), Value::integer(a));
      EXPECT_EQ(interpret(p, args), interpret(q, args)) << print_canonical(p);
    }
  }
}
