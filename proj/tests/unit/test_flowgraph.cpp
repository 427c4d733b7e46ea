#include <gtest/gtest.h>

#include <algorithm>

#include "flowco/flowgraph.hpp"
#include "support/fixtures.hpp"

using namespace flowco;

namespace {

std::vector<std::string> texts(const std::vector<FlowNode>& nodes) {
  std::vector<std::string> out;
  for (const auto& n : nodes) out.push_back(n.text);
  return out;
}

bool has_rule(const ValidationResult& r, const std::string& subject, const std::string& rule) {
  return std::any_of(r.violations.begin(), r.violations.end(),
                     [&](const Violation& v) { return v.subject == subject && v.rule == rule; });
}

}  // namespace

TEST(FlowGraph, ShapeTokens) {
  EXPECT_EQ(shape_token(BlockKind::Terminal), "OVAL");
  EXPECT_EQ(shape_token(BlockKind::Process), "RECTANGLE");
  EXPECT_EQ(shape_token(BlockKind::InputOutput), "PARALLELOGRAM");
  EXPECT_EQ(shape_token(BlockKind::Decision), "DIAMOND");
  EXPECT_EQ(kind_from_token("DIAMOND"), BlockKind::Decision);
  EXPECT_FALSE(kind_from_token("CIRCLE").has_value());
}

TEST(FlowGraph, Fun1ReferenceGraphValidates) { EXPECT_TRUE(validate(fixtures::fun1_reference_graph()).ok()); }

TEST(FlowGraph, DecisionWithOneEdge) {
  auto g = fixtures::diamond_graph();
  g.edges.erase(g.edges.begin() + 2);  // d -> p2
  g.nodes.erase(g.nodes.begin() + 3);
  g.edges.erase(std::remove_if(g.edges.begin(), g.edges.end(), [](const FlowEdge& e) { return e.src == "p2"; }),
                g.edges.end());
  const auto r = validate(g);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_rule(r, "d", "Decision out-degree \xE2\x89\xA0 2")) << r.describe();
}

TEST(FlowGraph, UnreachableNode) {
  auto g = fixtures::fun1_reference_graph();
  g.nodes.push_back({"x", BlockKind::Process, "z = 1"});
  g.edges.push_back({"x", "n4", EdgeLabel::Unlabeled});
  const auto r = validate(g);
  EXPECT_TRUE(has_rule(r, "x", "unreachable node")) << r.describe();
}

TEST(FlowGraph, OtherViolations) {
  FlowGraph empty;
  EXPECT_FALSE(validate(empty).ok());

  auto g = fixtures::fun1_reference_graph();
  g.nodes[2].text.clear();
  EXPECT_TRUE(has_rule(validate(g), "n2", "empty block text"));

  g = fixtures::fun1_reference_graph();
  g.edges[1].label = EdgeLabel::Yes;
  EXPECT_FALSE(validate(g).ok());

  g = fixtures::fun1_reference_graph();
  g.nodes[3].id = "n2";
  EXPECT_TRUE(has_rule(validate(g), "n2", "duplicate node id"));
}

TEST(FlowGraph, LinearizeFun1Reference) {
  EXPECT_EQ(texts(linearize(fixtures::fun1_reference_graph())),
            (std::vector<std::string>{"start fun1", "input: X", "y = ((16 + x) - 20)", "output: y",
                                      "end function return"}));
}

TEST(FlowGraph, LinearizeSingleTerminal) {
  FlowGraph g{{{"only", BlockKind::Terminal, "start f"}}, {}};
  ASSERT_TRUE(validate(g).ok());
  const auto order = linearize(g);
  ASSERT_EQ(order.size(), 1u);
  EXPECT_EQ(order[0].id, "only");
}

TEST(FlowGraph, LinearizeDiamondYesBranchFirst) {
  const auto order = linearize(fixtures::diamond_graph());
  std::vector<std::string> ids;
  for (const auto& n : order) ids.push_back(n.id);
  EXPECT_EQ(ids, (std::vector<std::string>{"s", "d", "p1", "p2", "j", "e"}));
}

TEST(FlowGraph, LinearizeRejectsInvalid) {
  auto g = fixtures::fun1_reference_graph();
  g.edges.pop_back();
  g.nodes[3].kind = BlockKind::Decision;
  EXPECT_THROW(linearize(g), Error);
}

TEST(FlowGraph, JsonRoundTrip) {
  const auto g = fixtures::diamond_graph();
  const auto j = to_json(g);
  EXPECT_EQ(j["nodes"][0].dump(), R"({"id":"s","kind":"OVAL","text":"start f"})");
  EXPECT_EQ(j["edges"][1].dump(), R"({"src":"d","dst":"p1","label":"yes"})");
  EXPECT_EQ(j["edges"][0]["label"], "-");
  EXPECT_EQ(graph_from_json(j), g);
}

TEST(FlowGraph, IsomorphismIgnoresIds) {
  auto a = fixtures::diamond_graph();
  auto b = a;
  for (auto& n : b.nodes) n.id = "z" + n.id;
  for (auto& e : b.edges) e.src = "z" + e.src, e.dst = "z" + e.dst;
  std::reverse(b.nodes.begin(), b.nodes.end());
  EXPECT_TRUE(isomorphic(a, b));
  b.edges[1].label = EdgeLabel::No;
  b.edges[2].label = EdgeLabel::Yes;
  EXPECT_FALSE(isomorphic(a, b));
}
