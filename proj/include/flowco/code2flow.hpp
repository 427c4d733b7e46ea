#pragma once

#include <string>
#include <utility>
#include <vector>

#include "flowco/flowgraph.hpp"
#include "flowco/pymini/analysis.hpp"
#include "flowco/pymini/ast.hpp"
#include "flowco/pymini/printer.hpp"

namespace flowco {

/// Fixed block texts of the lowering.
inline constexpr std::string_view kStartPrefix = "start ";
inline constexpr std::string_view kInputPrefix = "input: ";
inline constexpr std::string_view kOutputPrefix = "output: ";
inline constexpr std::string_view kReturnEnd = "end function return";
inline constexpr std::string_view kFallOffEnd = "end function";

namespace detail {

class Lowering {
 public:
  FlowGraph run(const pymini::Program& p) {
    std::vector<Exit> pending{{add(BlockKind::Terminal, std::string(kStartPrefix) + p.name), EdgeLabel::Unlabeled}};
    if (!p.params.empty()) {
      std::string text(kInputPrefix);
      for (std::size_t i = 0; i < p.params.size(); ++i) {
        if (i) text += ", ";
        text += p.params[i];
      }
      pending = {{chain(pending, BlockKind::InputOutput, text), EdgeLabel::Unlabeled}};
    }
    pending = block(p.body, std::move(pending));
    if (!pending.empty()) chain(pending, BlockKind::Terminal, std::string(kFallOffEnd));
    return std::move(graph_);
  }

 private:
  struct Exit {
    std::string node;
    EdgeLabel label;
  };

  std::string add(BlockKind kind, std::string text) {
    std::string id = "n" + std::to_string(graph_.nodes.size());
    graph_.nodes.push_back({id, kind, std::move(text)});
    return id;
  }

  void connect(const std::vector<Exit>& from, const std::string& to) {
    for (const auto& e : from) graph_.edges.push_back({e.node, to, e.label});
  }

  std::string chain(const std::vector<Exit>& from, BlockKind kind, std::string text) {
    std::string id = add(kind, std::move(text));
    connect(from, id);
    return id;
  }

  std::vector<Exit> block(const pymini::Block& stmts, std::vector<Exit> pending) {
    for (const auto& s : stmts) pending = statement(s, std::move(pending));
    return pending;
  }

  std::vector<Exit> statement(const pymini::Stmt& s, std::vector<Exit> pending) {
    using pymini::StmtKind;
    switch (s.kind) {
      case StmtKind::Assign:
      case StmtKind::AugAssign:
      case StmtKind::ExprStmt:
        return {{chain(pending, BlockKind::Process, pymini::print_stmt_line(s)), EdgeLabel::Unlabeled}};
      case StmtKind::Print:
        return {{chain(pending, BlockKind::InputOutput, std::string(kOutputPrefix) + pymini::print_stmt_line(s)),
                 EdgeLabel::Unlabeled}};
      case StmtKind::Return:
        if (!s.exprs.empty()) {
          std::string out = chain(pending, BlockKind::InputOutput,
                                  std::string(kOutputPrefix) + pymini::print_expr(s.exprs[0]));
          pending = {{out, EdgeLabel::Unlabeled}};
        }
        chain(pending, BlockKind::Terminal, std::string(kReturnEnd));
        return {};
      case StmtKind::If: {
        std::vector<Exit> exits;
        std::vector<Exit> fallthrough = std::move(pending);
        for (std::size_t i = 0; i < s.exprs.size(); ++i) {
          std::string d = chain(fallthrough, BlockKind::Decision, pymini::print_expr(s.exprs[i]));
          auto branch = block(s.bodies[i], {{d, EdgeLabel::Yes}});
          exits.insert(exits.end(), branch.begin(), branch.end());
          fallthrough = {{d, EdgeLabel::No}};
        }
        if (s.has_else) fallthrough = block(s.bodies.back(), std::move(fallthrough));
        exits.insert(exits.end(), fallthrough.begin(), fallthrough.end());
        return exits;
      }
      case StmtKind::While: {
        std::string d = chain(pending, BlockKind::Decision, pymini::print_expr(s.exprs[0]));
        connect(block(s.bodies[0], {{d, EdgeLabel::Yes}}), d);
        return {{d, EdgeLabel::No}};
      }
      case StmtKind::ForRange: {
        // Same shape as the while desugaring: init, test, body, increment.
        pymini::Block desugared;
        pymini::Stmt copy = s;
        pymini::detail::desugar_for(copy, desugared);
        for (const auto& d : desugared) pending = statement(d, std::move(pending));
        return pending;
      }
    }
    return pending;
  }

  FlowGraph graph_;
};

}  // namespace detail

/// Lowers a program to its flowchart. Simple statements map to one block
/// each; if/while become Decisions with Yes into the branch or loop body.
inline FlowGraph lower(const pymini::Program& p) { return detail::Lowering().run(p); }

}  // namespace flowco
