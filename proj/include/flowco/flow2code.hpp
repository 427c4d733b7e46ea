#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "flowco/code2flow.hpp"
#include "flowco/error.hpp"
#include "flowco/flowgraph.hpp"
#include "flowco/pymini/analysis.hpp"
#include "flowco/pymini/parser.hpp"
#include "flowco/pymini/printer.hpp"

namespace flowco {

namespace detail {

inline constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

/// Immediate dominators (Cooper, Harvey & Kennedy iterative scheme) of the
/// graph given by `succ`, rooted at `entry`. Unreachable nodes get kNone.
inline std::vector<std::size_t> immediate_dominators(const std::vector<std::vector<std::size_t>>& succ,
                                                     std::size_t entry) {
  const std::size_t n = succ.size();
  std::vector<std::size_t> order;  // postorder
  std::vector<std::size_t> post_index(n, kNone);
  {
    std::vector<bool> seen(n, false);
    std::vector<std::pair<std::size_t, std::size_t>> stack{{entry, 0}};
    seen[entry] = true;
    while (!stack.empty()) {
      auto& [u, pos] = stack.back();
      if (pos < succ[u].size()) {
        std::size_t v = succ[u][pos++];
        if (!seen[v]) {
          seen[v] = true;
          stack.emplace_back(v, 0);
        }
      } else {
        post_index[u] = order.size();
        order.push_back(u);
        stack.pop_back();
      }
    }
  }
  std::vector<std::vector<std::size_t>> pred(n);
  for (std::size_t u = 0; u < n; ++u) {
    for (auto v : succ[u]) pred[v].push_back(u);
  }

  std::vector<std::size_t> idom(n, kNone);
  idom[entry] = entry;
  auto intersect = [&](std::size_t a, std::size_t b) {
    while (a != b) {
      while (post_index[a] < post_index[b]) a = idom[a];
      while (post_index[b] < post_index[a]) b = idom[b];
    }
    return a;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const std::size_t u = *it;
      if (u == entry) continue;
      std::size_t candidate = kNone;
      for (auto p : pred[u]) {
        if (idom[p] == kNone) continue;
        candidate = candidate == kNone ? p : intersect(p, candidate);
      }
      if (candidate != idom[u]) {
        idom[u] = candidate;
        changed = true;
      }
    }
  }
  return idom;
}

inline bool dominates(const std::vector<std::size_t>& idom, std::size_t a, std::size_t b) {
  while (true) {
    if (b == a) return true;
    if (idom[b] == kNone || idom[b] == b) return false;
    b = idom[b];
  }
}

class Structurer {
 public:
  explicit Structurer(const FlowGraph& g) : g_(g) {}

  pymini::Program run() {
    if (auto v = validate(g_); !v.ok()) throw Error(ErrorKind::InvalidGraph, v.describe());
    const std::size_t n = g_.nodes.size();
    yes_.assign(n, kNone);
    no_.assign(n, kNone);
    next_.assign(n, kNone);
    preds_.assign(n, {});
    for (const auto& e : g_.edges) {
      const std::size_t s = *g_.index_of(e.src);
      const std::size_t d = *g_.index_of(e.dst);
      preds_[d].push_back(s);
      if (e.label == EdgeLabel::Yes) {
        yes_[s] = d;
      } else if (e.label == EdgeLabel::No) {
        no_[s] = d;
      } else {
        next_[s] = d;
      }
    }
    const auto succ = ordered_successors(g_);
    const std::size_t start = start_index(g_);

    // Dominators and back edges (loops).
    const auto idom = immediate_dominators(succ, start);
    header_.assign(n, false);
    find_loops(succ, start, idom);

    rpo_pos_.assign(n, n);
    const auto order = linearize_indices(g_);
    for (std::size_t i = 0; i < order.size(); ++i) rpo_pos_[order[i]] = i;
    succ_ = succ;

    pymini::Program p;
    const FlowNode& s = g_.nodes[start];
    if (s.text.rfind(kStartPrefix, 0) != 0) fragment_error(start, "start block must read 'start <name>'");
    p.name = s.text.substr(kStartPrefix.size());
    if (!pymini::is_identifier(p.name) || pymini::is_builtin(p.name)) fragment_error(start, "invalid function name");
    name_ = p.name;

    emitted_.assign(n, false);
    emitted_[start] = true;
    std::size_t cur = next_[start];
    if (cur == kNone) throw Error(ErrorKind::Unstructurable, "flowchart has no body");
    const FlowNode& first = g_.nodes[cur];
    if (first.kind == BlockKind::InputOutput && first.text.rfind(kInputPrefix, 0) == 0) {
      p.params = parse_params(cur);
      emitted_[cur] = true;
      cur = next_[cur];
    }
    p.body = walk(cur, {});
    for (std::size_t i = 0; i < n; ++i) {
      if (!emitted_[i] && g_.nodes[i].kind != BlockKind::Terminal) {
        throw Error(ErrorKind::Unstructurable, "block " + g_.nodes[i].id + " is not part of any structured region");
      }
    }
    if (p.body.empty()) throw Error(ErrorKind::Unstructurable, "flowchart has no body");

    p = pymini::normalize(std::move(p));
    try {
      (void)pymini::parse(pymini::print_canonical(p));
    } catch (const Error& e) {
      throw Error(ErrorKind::Unstructurable, std::string("result is not a valid program: ") + e.what());
    }
    return p;
  }

 private:
  [[noreturn]] void fragment_error(std::size_t node, const std::string& why) const {
    throw Error(ErrorKind::FragmentParseError, g_.nodes[node].id + ": " + why + " ('" + g_.nodes[node].text + "')");
  }

  void find_loops(const std::vector<std::vector<std::size_t>>& succ, std::size_t start,
                  const std::vector<std::size_t>& idom) {
    const std::size_t n = succ.size();
    std::vector<int> state(n, 0);  // 0 new, 1 on stack, 2 done
    std::vector<std::pair<std::size_t, std::size_t>> stack{{start, 0}};
    std::vector<std::pair<std::size_t, std::size_t>> back_edges;
    state[start] = 1;
    while (!stack.empty()) {
      auto& [u, pos] = stack.back();
      if (pos < succ[u].size()) {
        std::size_t v = succ[u][pos++];
        if (state[v] == 0) {
          state[v] = 1;
          stack.emplace_back(v, 0);
        } else if (state[v] == 1) {
          back_edges.emplace_back(u, v);
        }
      } else {
        state[u] = 2;
        stack.pop_back();
      }
    }
    for (const auto& [u, h] : back_edges) {
      if (!dominates(idom, h, u)) {
        throw Error(ErrorKind::Unstructurable,
                    "irreducible cycle: " + g_.nodes[h].id + " is entered other than through its loop test");
      }
      if (g_.nodes[h].kind != BlockKind::Decision) {
        throw Error(ErrorKind::Unstructurable, "cycle through " + g_.nodes[h].id + " has no loop test");
      }
      header_[h] = true;
    }
    // Natural loop of each header: yes side inside, no side outside.
    for (std::size_t h = 0; h < n; ++h) {
      if (!header_[h]) continue;
      std::vector<bool> in_loop(n, false);
      in_loop[h] = true;
      std::vector<std::size_t> work;
      for (const auto& [u, hh] : back_edges) {
        if (hh == h && !in_loop[u]) {
          in_loop[u] = true;
          work.push_back(u);
        }
      }
      while (!work.empty()) {
        std::size_t x = work.back();
        work.pop_back();
        for (auto p : preds_[x]) {
          if (!in_loop[p]) {
            in_loop[p] = true;
            work.push_back(p);
          }
        }
      }
      if (!in_loop[yes_[h]] || in_loop[no_[h]]) {
        throw Error(ErrorKind::Unstructurable, "loop at " + g_.nodes[h].id + " must repeat on yes and leave on no");
      }
    }
  }

  std::vector<std::string> parse_params(std::size_t node) const {
    std::string rest = g_.nodes[node].text.substr(kInputPrefix.size());
    std::vector<std::string> params;
    std::size_t pos = 0;
    while (true) {
      std::size_t comma = rest.find(", ", pos);
      std::string name = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (!pymini::is_identifier(name) || pymini::is_builtin(name)) fragment_error(node, "invalid parameter list");
      if (std::find(params.begin(), params.end(), name) != params.end()) fragment_error(node, "duplicate parameter");
      params.push_back(std::move(name));
      if (comma == std::string::npos) break;
      pos = comma + 2;
    }
    return params;
  }

  pymini::Stmt statement_fragment(std::size_t node, const std::string& text) const {
    try {
      return pymini::parse_statement(text, name_);
    } catch (const Error& e) {
      fragment_error(node, e.what());
    }
  }

  pymini::Expr expression_fragment(std::size_t node, const std::string& text) const {
    try {
      return pymini::parse_expression(text, name_);
    } catch (const Error& e) {
      fragment_error(node, e.what());
    }
  }

  bool is_output_block(std::size_t node) const {
    const FlowNode& b = g_.nodes[node];
    return b.kind == BlockKind::InputOutput && b.text.rfind(kOutputPrefix, 0) == 0;
  }

  std::vector<bool> reach(std::size_t from, const std::set<std::size_t>& stop) const {
    std::vector<bool> seen(g_.nodes.size(), false);
    std::vector<std::size_t> work;
    if (!stop.count(from)) {
      seen[from] = true;
      work.push_back(from);
    }
    while (!work.empty()) {
      const std::size_t u = work.back();
      work.pop_back();
      for (auto v : succ_[u]) {
        if (!seen[v] && !stop.count(v)) {
          seen[v] = true;
          work.push_back(v);
        }
      }
    }
    return seen;
  }

  // First non-terminal block both branches of a decision can fall through
  // to without leaving the current region; kNone when they never meet.
  std::size_t branch_join(std::size_t decision, std::set<std::size_t> stop) const {
    stop.insert(decision);
    const auto a = reach(yes_[decision], stop);
    const auto b = reach(no_[decision], stop);
    std::size_t best = kNone;
    for (std::size_t v = 0; v < g_.nodes.size(); ++v) {
      if (a[v] && b[v] && g_.nodes[v].kind != BlockKind::Terminal && (best == kNone || rpo_pos_[v] < rpo_pos_[best])) {
        best = v;
      }
    }
    return best;
  }

  pymini::Block walk(std::size_t node, std::set<std::size_t> stop) {
    using pymini::Stmt;
    using pymini::StmtKind;
    pymini::Block out;
    while (node != kNone && !stop.count(node)) {
      const FlowNode& b = g_.nodes[node];
      if (b.kind == BlockKind::Terminal) {
        if (b.text == kReturnEnd) {
          bool all_outputs = !preds_[node].empty();
          for (auto p : preds_[node]) all_outputs = all_outputs && is_output_block(p);
          if (!all_outputs) out.push_back(Stmt::ret());
        } else if (b.text != kFallOffEnd) {
          fragment_error(node, "unknown terminal text");
        }
        emitted_[node] = true;
        return out;
      }
      if (emitted_[node]) {
        throw Error(ErrorKind::Unstructurable, "block " + b.id + " is reached from two regions that never rejoin");
      }
      emitted_[node] = true;

      switch (b.kind) {
        case BlockKind::Process: {
          Stmt s = statement_fragment(node, b.text);
          if (s.kind != StmtKind::Assign && s.kind != StmtKind::AugAssign && s.kind != StmtKind::ExprStmt) {
            fragment_error(node, "process block must hold a simple statement");
          }
          out.push_back(std::move(s));
          node = next_[node];
          break;
        }
        case BlockKind::InputOutput: {
          if (!is_output_block(node)) fragment_error(node, "input block outside the function head");
          const std::string rest = b.text.substr(kOutputPrefix.size());
          if (rest.rfind("print(", 0) == 0) {
            Stmt s = statement_fragment(node, rest);
            if (s.kind != StmtKind::Print) fragment_error(node, "malformed print");
            out.push_back(std::move(s));
            node = next_[node];
            break;
          }
          const std::size_t after = next_[node];
          if (after == kNone || g_.nodes[after].kind != BlockKind::Terminal || g_.nodes[after].text != kReturnEnd) {
            fragment_error(node, "output value must be followed by 'end function return'");
          }
          out.push_back(Stmt::ret(expression_fragment(node, rest)));
          emitted_[after] = true;
          return out;
        }
        case BlockKind::Decision: {
          pymini::Expr cond = expression_fragment(node, b.text);
          if (header_[node]) {
            auto inner = stop;
            inner.insert(node);
            pymini::Block body = walk(yes_[node], inner);
            if (body.empty()) throw Error(ErrorKind::Unstructurable, "empty loop body at " + b.id);
            out.push_back(Stmt::while_loop(std::move(cond), std::move(body)));
            node = no_[node];
            break;
          }
          const std::size_t join = branch_join(node, stop);
          auto inner = stop;
          if (join != kNone) inner.insert(join);
          pymini::Block then_body = walk(yes_[node], inner);
          pymini::Block else_body = walk(no_[node], inner);
          if (then_body.empty()) throw Error(ErrorKind::Unstructurable, "empty yes branch at " + b.id);
          out.push_back(Stmt::if_else(std::move(cond), std::move(then_body), std::move(else_body)));
          if (join == kNone) return out;
          node = join;
          break;
        }
        case BlockKind::Terminal: break;
      }
    }
    return out;
  }

  const FlowGraph& g_;
  std::string name_;
  std::vector<std::size_t> yes_, no_, next_;
  std::vector<std::vector<std::size_t>> preds_;
  std::vector<bool> header_;
  std::vector<std::vector<std::size_t>> succ_;
  std::vector<std::size_t> rpo_pos_;
  std::vector<bool> emitted_;
};

}  // namespace detail

/// Rebuilds a structured program from a flowchart: Decisions with a back
/// edge become while loops, other Decisions become if/else regions closed at
/// the first block both branches fall through to. The result is in
/// normalized form.
inline pymini::Program structure(const FlowGraph& g) { return detail::Structurer(g).run(); }

}  // namespace flowco
