#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "flowco/code2flow.hpp"
#include "flowco/pymini/parser.hpp"
#include "flowco/pymini/printer.hpp"
#include "support/fixtures.hpp"
#include "support/program_gen.hpp"

using namespace flowco;

namespace {

FlowGraph lower_src(const std::string& src) { return lower(pymini::parse(src)); }

std::vector<std::pair<BlockKind, std::string>> blocks(const FlowGraph& g) {
  std::vector<std::pair<BlockKind, std::string>> out;
  for (const auto& n : g.nodes) out.emplace_back(n.kind, n.text);
  return out;
}

const FlowNode& by_text(const FlowGraph& g, const std::string& text) {
  auto it = std::find_if(g.nodes.begin(), g.nodes.end(), [&](const FlowNode& n) { return n.text == text; });
  if (it == g.nodes.end()) throw std::runtime_error("no node " + text);
  return *it;
}

std::set<std::string> reachable(const FlowGraph& g, const std::string& from) {
  std::set<std::string> seen{from};
  std::vector<std::string> stack{from};
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    for (const auto& e : g.edges) {
      if (e.src == cur && seen.insert(e.dst).second) stack.push_back(e.dst);
    }
  }
  return seen;
}

// Expected node count from the source AST, counted independently of the
// lowering: one node per simple statement, two per valued return, one per
// condition, two extra per for loop (init and increment).
struct Count {
  std::size_t nodes = 0;
  bool falls_through = true;
};

Count count_block(const pymini::Block& b);

Count count_stmt(const pymini::Stmt& s) {
  using pymini::StmtKind;
  switch (s.kind) {
    case StmtKind::Return: return {s.exprs.empty() ? 1u : 2u, false};
    case StmtKind::If: {
      Count c{s.exprs.size(), !s.has_else};
      for (const auto& b : s.bodies) {
        const auto inner = count_block(b);
        c.nodes += inner.nodes;
        c.falls_through = c.falls_through || inner.falls_through;
      }
      return c;
    }
    case StmtKind::While: return {1 + count_block(s.bodies[0]).nodes, true};
    case StmtKind::ForRange: return {3 + count_block(s.bodies[0]).nodes, true};
    default: return {1, true};
  }
}

Count count_block(const pymini::Block& b) {
  Count c;
  for (const auto& s : b) {
    const auto k = count_stmt(s);
    c.nodes += k.nodes;
    c.falls_through = k.falls_through;
    if (!k.falls_through) break;
  }
  return c;
}

}  // namespace

TEST(Code2Flow, Fun1IsLinear) {
  const auto g = lower_src(fixtures::kFun1Source);
  EXPECT_EQ(blocks(g), (std::vector<std::pair<BlockKind, std::string>>{
                           {BlockKind::Terminal, "start fun1"},
                           {BlockKind::InputOutput, "input: x"},
                           {BlockKind::Process, "y = ((16 + x) - 20)"},
                           {BlockKind::InputOutput, "output: y"},
                           {BlockKind::Terminal, "end function return"}}));
  ASSERT_EQ(g.edges.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(g.edges[i].src, g.nodes[i].id);
    EXPECT_EQ(g.edges[i].dst, g.nodes[i + 1].id);
    EXPECT_EQ(g.edges[i].label, EdgeLabel::Unlabeled);
  }
}

TEST(Code2Flow, WhileHasBackEdge) {
  const auto g = lower_src("def fact(n):\n    r = 1\n    while n > 1:\n        r = r * n\n        n = n - 1\n    return r\n");
  ASSERT_TRUE(validate(g).ok());
  ASSERT_EQ(std::count_if(g.nodes.begin(), g.nodes.end(), [](const FlowNode& n) { return n.kind == BlockKind::Decision; }),
            1);
  const auto& d = by_text(g, "n > 1");
  const auto& end = by_text(g, "end function return");
  std::string yes, no;
  for (const auto& e : g.edges) {
    if (e.src == d.id && e.label == EdgeLabel::Yes) yes = e.dst;
    if (e.src == d.id && e.label == EdgeLabel::No) no = e.dst;
  }
  EXPECT_TRUE(reachable(g, no).count(end.id));
  EXPECT_FALSE(reachable(g, no).count(d.id));
  EXPECT_TRUE(reachable(g, yes).count(d.id));
  const auto& last = by_text(g, "n = n - 1");
  EXPECT_TRUE(std::any_of(g.edges.begin(), g.edges.end(),
                          [&](const FlowEdge& e) { return e.src == last.id && e.dst == d.id; }));
}

TEST(Code2Flow, BareReturnWithoutParams) {
  const auto g = lower_src("def f():\n    return\n");
  EXPECT_EQ(blocks(g), (std::vector<std::pair<BlockKind, std::string>>{{BlockKind::Terminal, "start f"},
                                                                       {BlockKind::Terminal, "end function return"}}));
  EXPECT_EQ(g.edges.size(), 1u);
}

TEST(Code2Flow, FallOffEnd) {
  const auto g = lower_src("def f(a, b):\n    print(a, b)\n");
  EXPECT_EQ(blocks(g), (std::vector<std::pair<BlockKind, std::string>>{{BlockKind::Terminal, "start f"},
                                                                       {BlockKind::InputOutput, "input: a, b"},
                                                                       {BlockKind::InputOutput, "output: print(a, b)"},
                                                                       {BlockKind::Terminal, "end function"}}));
}

TEST(Code2Flow, ForRangeDesugars) {
  const auto g = lower_src("def f(n):\n    for i in range(2, n):\n        print(i)\n    return n\n");
  ASSERT_TRUE(validate(g).ok());
  const auto& init = by_text(g, "i = 2");
  const auto& test = by_text(g, "i < n");
  const auto& inc = by_text(g, "i += 1");
  EXPECT_EQ(init.kind, BlockKind::Process);
  EXPECT_EQ(test.kind, BlockKind::Decision);
  EXPECT_EQ(inc.kind, BlockKind::Process);
  EXPECT_TRUE(std::any_of(g.edges.begin(), g.edges.end(),
                          [&](const FlowEdge& e) { return e.src == inc.id && e.dst == test.id; }));
}

TEST(Code2Flow, NegativeStepCountsDown) {
  const auto g = lower_src("def f(n):\n    for i in range(n, 0, -2):\n        print(i)\n    return n\n");
  EXPECT_EQ(by_text(g, "i > 0").kind, BlockKind::Decision);
  EXPECT_EQ(by_text(g, "i -= 2").kind, BlockKind::Process);
}

TEST(Code2Flow, ElifNestsDecisions) {
  const auto g = lower_src(
      "def f(a):\n    if a > 0:\n        b = 1\n    elif a < 0:\n        b = 2\n    else:\n        b = 3\n    return b\n");
  ASSERT_TRUE(validate(g).ok());
  const auto& d1 = by_text(g, "a > 0");
  const auto& d2 = by_text(g, "a < 0");
  EXPECT_TRUE(std::any_of(g.edges.begin(), g.edges.end(), [&](const FlowEdge& e) {
    return e.src == d1.id && e.dst == d2.id && e.label == EdgeLabel::No;
  }));
  // All three branches meet at the output block.
  const auto& out = by_text(g, "output: b");
  EXPECT_EQ(std::count_if(g.edges.begin(), g.edges.end(), [&](const FlowEdge& e) { return e.dst == out.id; }), 3);
}

TEST(Code2Flow, ValidAndLinearOnGeneratedPrograms) {
  for (unsigned seed = 0; seed < 500; ++seed) {
    const auto p = pymini::parse(testgen::ProgramGen(seed).program());
    const auto g = lower(p);
    ASSERT_TRUE(validate(g).ok()) << validate(g).describe();
    const auto c = count_block(p.body);
    const std::size_t expected = 1 + (p.params.empty() ? 0 : 1) + c.nodes + (c.falls_through ? 1 : 0);
    EXPECT_EQ(g.nodes.size(), expected) << seed;
  }
}

TEST(Code2Flow, DifferentProgramsDifferentGraphs) {
  std::map<std::string, std::string> seen;
  for (unsigned seed = 0; seed < 300; ++seed) {
    const auto p = pymini::parse(testgen::ProgramGen(seed).program());
    const auto key = to_json(lower(p)).dump();
    const auto src = pymini::print_canonical(p);
    auto [it, fresh] = seen.emplace(key, src);
    if (!fresh) {
      EXPECT_EQ(it->second, src);
    }
  }
}
