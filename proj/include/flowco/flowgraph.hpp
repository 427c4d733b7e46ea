#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowco/error.hpp"

namespace flowco {

enum class BlockKind { Terminal, Process, InputOutput, Decision };

inline std::string_view shape_token(BlockKind kind) {
  switch (kind) {
    case BlockKind::Terminal: return "OVAL";
    case BlockKind::Process: return "RECTANGLE";
    case BlockKind::InputOutput: return "PARALLELOGRAM";
    case BlockKind::Decision: return "DIAMOND";
  }
  return "RECTANGLE";
}

inline std::optional<BlockKind> kind_from_token(std::string_view token) {
  if (token == "OVAL") return BlockKind::Terminal;
  if (token == "RECTANGLE") return BlockKind::Process;
  if (token == "PARALLELOGRAM") return BlockKind::InputOutput;
  if (token == "DIAMOND") return BlockKind::Decision;
  return std::nullopt;
}

enum class EdgeLabel { Unlabeled, Yes, No };

inline std::string_view to_string(EdgeLabel label) {
  switch (label) {
    case EdgeLabel::Unlabeled: return "-";
    case EdgeLabel::Yes: return "yes";
    case EdgeLabel::No: return "no";
  }
  return "-";
}

struct FlowNode {
  std::string id;
  BlockKind kind = BlockKind::Process;
  std::string text;

  bool operator==(const FlowNode&) const = default;
};

struct FlowEdge {
  std::string src;
  std::string dst;
  EdgeLabel label = EdgeLabel::Unlabeled;

  bool operator==(const FlowEdge&) const = default;
};

struct FlowGraph {
  std::vector<FlowNode> nodes;
  std::vector<FlowEdge> edges;

  bool operator==(const FlowGraph&) const = default;

  std::optional<std::size_t> index_of(std::string_view id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].id == id) return i;
    }
    return std::nullopt;
  }
};

struct Violation {
  std::string subject;  // node id or "src->dst"
  std::string rule;

  bool operator==(const Violation&) const = default;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  explicit operator bool() const { return ok(); }

  std::string describe() const {
    std::string out;
    for (const auto& v : violations) {
      if (!out.empty()) out += "; ";
      out += v.subject + ": " + v.rule;
    }
    return out;
  }
};

namespace detail {

/// Adjacency view over a FlowGraph using node indices. Out-edges of a
/// Decision are stored as {yes, no} once validated.
struct IndexedGraph {
  std::vector<std::vector<std::pair<std::size_t, EdgeLabel>>> out;
  std::vector<std::vector<std::size_t>> in;
  std::vector<std::string> dangling;  // edges naming unknown ids

  explicit IndexedGraph(const FlowGraph& g) : out(g.nodes.size()), in(g.nodes.size()) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) index.emplace(g.nodes[i].id, i);
    for (const auto& e : g.edges) {
      auto s = index.find(e.src);
      auto d = index.find(e.dst);
      if (s == index.end() || d == index.end()) {
        dangling.push_back(e.src + "->" + e.dst);
        continue;
      }
      out[s->second].emplace_back(d->second, e.label);
      in[d->second].push_back(s->second);
    }
  }
};

}  // namespace detail

/// Checks the structural rules of the flowchart IR. Violations come back as
/// data; nothing throws.
inline ValidationResult validate(const FlowGraph& g) {
  ValidationResult result;
  auto fail = [&](std::string subject, std::string rule) {
    result.violations.push_back({std::move(subject), std::move(rule)});
  };

  if (g.nodes.empty()) {
    fail("graph", "no nodes");
    return result;
  }

  std::map<std::string, int> seen;
  for (const auto& n : g.nodes) {
    if (++seen[n.id] == 2) fail(n.id, "duplicate node id");
    if (n.text.empty()) fail(n.id, "empty block text");
  }

  detail::IndexedGraph ig(g);
  for (const auto& d : ig.dangling) fail(d, "edge references unknown node");

  std::vector<std::size_t> starts;
  bool has_end = false;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    const auto& outs = ig.out[i];
    const bool is_terminal = n.kind == BlockKind::Terminal;
    if (is_terminal && ig.in[i].empty()) starts.push_back(i);
    const bool is_end = is_terminal && outs.empty();
    if (is_end) has_end = true;

    if (n.kind == BlockKind::Decision) {
      int yes = 0;
      int no = 0;
      for (const auto& [dst, label] : outs) {
        if (label == EdgeLabel::Yes) ++yes;
        if (label == EdgeLabel::No) ++no;
      }
      if (outs.size() != 2) {
        fail(n.id, "Decision out-degree \xE2\x89\xA0 2");
      } else if (yes != 1 || no != 1) {
        fail(n.id, "Decision needs one yes and one no edge");
      }
    } else {
      for (const auto& [dst, label] : outs) {
        if (label != EdgeLabel::Unlabeled) {
          fail(n.id + "->" + g.nodes[dst].id, "yes/no label on non-Decision edge");
        }
      }
      if (outs.empty() ? !is_terminal : outs.size() != 1) fail(n.id, "out-degree \xE2\x89\xA0 1");
    }
  }

  if (starts.size() != 1) {
    fail("graph", "expected exactly one start node, found " + std::to_string(starts.size()));
  }
  if (!has_end) fail("graph", "no end node");

  if (starts.size() == 1) {
    std::vector<bool> reached(g.nodes.size(), false);
    std::vector<std::size_t> stack{starts.front()};
    reached[starts.front()] = true;
    while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      for (const auto& [v, label] : ig.out[u]) {
        if (!reached[v]) {
          reached[v] = true;
          stack.push_back(v);
        }
      }
    }
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      if (!reached[i]) fail(g.nodes[i].id, "unreachable node");
    }
  }
  return result;
}

inline std::size_t start_index(const FlowGraph& g) {
  detail::IndexedGraph ig(g);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (g.nodes[i].kind == BlockKind::Terminal && ig.in[i].empty()) return i;
  }
  throw Error(ErrorKind::InvalidGraph, "no start node");
}

/// Successors in traversal priority: Yes before No for Decisions.
inline std::vector<std::vector<std::size_t>> ordered_successors(const FlowGraph& g) {
  detail::IndexedGraph ig(g);
  std::vector<std::vector<std::size_t>> succ(g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    auto outs = ig.out[i];
    std::stable_sort(outs.begin(), outs.end(), [](const auto& a, const auto& b) {
      auto rank = [](EdgeLabel l) { return l == EdgeLabel::Yes ? 0 : l == EdgeLabel::No ? 1 : 2; };
      return rank(a.second) < rank(b.second);
    });
    for (const auto& [v, label] : outs) succ[i].push_back(v);
  }
  return succ;
}

/// Node indices in block order: reverse postorder of a depth-first walk from
/// the start node. The walk descends into No before Yes, so after reversal
/// every Decision is followed by its Yes branch, then its No branch, and join
/// points come after both branches.
inline std::vector<std::size_t> linearize_indices(const FlowGraph& g) {
  if (auto v = validate(g); !v.ok()) throw Error(ErrorKind::InvalidGraph, v.describe());
  const auto succ = ordered_successors(g);
  const std::size_t root = start_index(g);

  std::vector<bool> visited(g.nodes.size(), false);
  std::vector<std::size_t> postorder;
  postorder.reserve(g.nodes.size());
  // Frame: node, next child position (children iterated last-to-first).
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  visited[root] = true;
  stack.emplace_back(root, 0);
  while (!stack.empty()) {
    auto& [u, pos] = stack.back();
    const auto& children = succ[u];
    if (pos < children.size()) {
      const std::size_t v = children[children.size() - 1 - pos];
      ++pos;
      if (!visited[v]) {
        visited[v] = true;
        stack.emplace_back(v, 0);
      }
    } else {
      postorder.push_back(u);
      stack.pop_back();
    }
  }
  std::reverse(postorder.begin(), postorder.end());
  return postorder;
}

inline std::vector<FlowNode> linearize(const FlowGraph& g) {
  std::vector<FlowNode> out;
  for (auto i : linearize_indices(g)) out.push_back(g.nodes[i]);
  return out;
}

/// Rooted, edge-labelled isomorphism with identical block kinds and texts.
/// Both graphs must validate; the canonical block order gives the mapping.
inline bool isomorphic(const FlowGraph& a, const FlowGraph& b) {
  if (!validate(a).ok() || !validate(b).ok()) return false;
  if (a.nodes.size() != b.nodes.size() || a.edges.size() != b.edges.size()) return false;
  const auto oa = linearize_indices(a);
  const auto ob = linearize_indices(b);
  std::vector<std::size_t> rank_a(a.nodes.size()), rank_b(b.nodes.size());
  for (std::size_t i = 0; i < oa.size(); ++i) {
    rank_a[oa[i]] = i;
    rank_b[ob[i]] = i;
    const auto& na = a.nodes[oa[i]];
    const auto& nb = b.nodes[ob[i]];
    if (na.kind != nb.kind || na.text != nb.text) return false;
  }
  auto edge_set = [](const FlowGraph& g, const std::vector<std::size_t>& rank) {
    std::vector<std::tuple<std::size_t, std::size_t, EdgeLabel>> edges;
    for (const auto& e : g.edges) {
      edges.emplace_back(rank[*g.index_of(e.src)], rank[*g.index_of(e.dst)], e.label);
    }
    std::sort(edges.begin(), edges.end());
    return edges;
  };
  return edge_set(a, rank_a) == edge_set(b, rank_b);
}

// --- JSON form -------------------------------------------------------------

inline nlohmann::ordered_json to_json(const FlowGraph& g) {
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (const auto& n : g.nodes) {
    nlohmann::ordered_json j;
    j["id"] = n.id;
    j["kind"] = std::string(shape_token(n.kind));
    j["text"] = n.text;
    nodes.push_back(std::move(j));
  }
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (const auto& e : g.edges) {
    nlohmann::ordered_json j;
    j["src"] = e.src;
    j["dst"] = e.dst;
    j["label"] = std::string(to_string(e.label));
    edges.push_back(std::move(j));
  }
  nlohmann::ordered_json out;
  out["nodes"] = std::move(nodes);
  out["edges"] = std::move(edges);
  return out;
}

template <class Json>
FlowGraph graph_from_json(const Json& j) {
  FlowGraph g;
  try {
    for (const auto& n : j.at("nodes")) {
      auto token = n.at("kind").template get<std::string>();
      auto kind = kind_from_token(token);
      if (!kind) throw Error(ErrorKind::ParseError, "unknown block kind '" + token + "'");
      g.nodes.push_back({n.at("id").template get<std::string>(), *kind, n.at("text").template get<std::string>()});
    }
    for (const auto& e : j.at("edges")) {
      auto label = e.at("label").template get<std::string>();
      EdgeLabel l = EdgeLabel::Unlabeled;
      if (label == "yes") {
        l = EdgeLabel::Yes;
      } else if (label == "no") {
        l = EdgeLabel::No;
      } else if (label != "-") {
        throw Error(ErrorKind::ParseError, "unknown edge label '" + label + "'");
      }
      g.edges.push_back({e.at("src").template get<std::string>(), e.at("dst").template get<std::string>(), l});
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::ParseError, std::string("malformed flowgraph JSON: ") + ex.what());
  }
  return g;
}

}  // namespace flowco
