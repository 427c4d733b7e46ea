#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "flowco/pymini/ast.hpp"
#include "flowco/pymini/parser.hpp"

namespace flowco::pymini {

struct Identifiers {
  std::set<std::string> functions;
  std::set<std::string> variables;

  bool operator==(const Identifiers&) const = default;
};

namespace detail {

inline void collect_calls(const Expr& e, std::set<std::string>& out) {
  if (e.kind == ExprKind::Call && !is_builtin(e.text)) out.insert(e.text);
  for (const auto& a : e.args) collect_calls(a, out);
}

inline void collect_ids(const Block& block, Identifiers& ids) {
  for (const auto& s : block) {
    if (s.kind == StmtKind::Assign || s.kind == StmtKind::AugAssign || s.kind == StmtKind::ForRange) {
      ids.variables.insert(s.target);
    }
    for (const auto& e : s.exprs) collect_calls(e, ids.functions);
    for (const auto& b : s.bodies) collect_ids(b, ids);
  }
}

inline void collect_names(const Expr& e, std::set<std::string>& out) {
  if (e.kind == ExprKind::Name || e.kind == ExprKind::Call) out.insert(e.text);
  for (const auto& a : e.args) collect_names(a, out);
}

inline void collect_all_names(const Block& block, std::set<std::string>& out) {
  for (const auto& s : block) {
    if (!s.target.empty()) out.insert(s.target);
    for (const auto& e : s.exprs) collect_names(e, out);
    for (const auto& b : s.bodies) collect_all_names(b, out);
  }
}

inline void rename_expr(Expr& e, const std::map<std::string, std::string>& vars,
                        const std::map<std::string, std::string>& funcs) {
  if (e.kind == ExprKind::Name) {
    if (auto it = vars.find(e.text); it != vars.end()) e.text = it->second;
  } else if (e.kind == ExprKind::Call) {
    if (auto it = funcs.find(e.text); it != funcs.end()) e.text = it->second;
  }
  for (auto& a : e.args) rename_expr(a, vars, funcs);
}

inline void rename_block(Block& block, const std::map<std::string, std::string>& vars,
                         const std::map<std::string, std::string>& funcs) {
  for (auto& s : block) {
    if (!s.target.empty()) {
      if (auto it = vars.find(s.target); it != vars.end()) s.target = it->second;
    }
    for (auto& e : s.exprs) rename_expr(e, vars, funcs);
    for (auto& b : s.bodies) rename_block(b, vars, funcs);
  }
}

}  // namespace detail

/// Function names (the definition and user calls) and variable names
/// (parameters, assignment targets, loop variables). Builtins are excluded.
inline Identifiers identifiers(const Program& p) {
  Identifiers ids;
  ids.functions.insert(p.name);
  ids.variables.insert(p.params.begin(), p.params.end());
  detail::collect_ids(p.body, ids);
  return ids;
}

/// Every identifier spelled anywhere in the program, including names that
/// are read but never bound.
inline std::set<std::string> all_names(const Program& p) {
  std::set<std::string> out{p.name};
  out.insert(p.params.begin(), p.params.end());
  detail::collect_all_names(p.body, out);
  return out;
}

/// Applies a renaming to the definition and every use. Identifiers absent
/// from the maps are left untouched.
inline Program apply_renaming(Program p, const std::map<std::string, std::string>& vars,
                              const std::map<std::string, std::string>& funcs) {
  if (auto it = funcs.find(p.name); it != funcs.end()) p.name = it->second;
  for (auto& param : p.params) {
    if (auto it = vars.find(param); it != vars.end()) param = it->second;
  }
  detail::rename_block(p.body, vars, funcs);
  return p;
}

namespace detail {

inline Block normalize_block(Block block);

// for v in range(a, b, s): body  ->  v = a; while v < b: body; v += s
inline void desugar_for(const Stmt& s, Block& out) {
  Expr start = s.exprs.size() >= 2 ? s.exprs[0] : Expr::integer(0);
  Expr stop = s.exprs.size() >= 2 ? s.exprs[1] : s.exprs[0];
  const std::int64_t step = range_step(s.exprs);
  Expr step_expr = s.exprs.size() == 3 ? s.exprs[2] : Expr::integer(1);
  step_expr.parens = 0;
  Block body = s.bodies[0];
  if (step < 0) {
    Expr magnitude = step_expr.kind == ExprKind::Unary ? step_expr.args[0] : Expr::integer(-step);
    body.push_back(Stmt::aug_assign(s.target, "-=", magnitude));
  } else {
    body.push_back(Stmt::aug_assign(s.target, "+=", step_expr));
  }
  out.push_back(Stmt::assign(s.target, std::move(start)));
  out.push_back(Stmt::while_loop(Expr::compare(step < 0 ? ">" : "<", Expr::name(s.target), std::move(stop)),
                                 normalize_block(std::move(body))));
}

// else: <single if>  ->  elif
inline void fold_elif(Stmt& s) {
  while (s.kind == StmtKind::If && s.has_else && s.bodies.back().size() == 1 &&
         s.bodies.back().front().kind == StmtKind::If) {
    Stmt inner = std::move(s.bodies.back().front());
    s.bodies.pop_back();
    s.has_else = inner.has_else;
    for (auto& c : inner.exprs) s.exprs.push_back(std::move(c));
    for (auto& b : inner.bodies) s.bodies.push_back(std::move(b));
  }
}

// An if statement seen as `if c: A else: B` (B holds the rest of an elif
// chain). Statements after it move into B when only A returns, into A when
// only B returns. Returns the emitted statements; `rest` is consumed when moved.
inline Block normalize_if(Stmt s, Block& rest) {
  Block a = std::move(s.bodies[0]);
  Block b;
  bool has_else = s.has_else;
  if (s.exprs.size() > 1) {
    Stmt tail = s;
    tail.exprs.erase(tail.exprs.begin());
    tail.bodies.erase(tail.bodies.begin());
    b.push_back(std::move(tail));
    has_else = true;
  } else if (has_else) {
    b = std::move(s.bodies[1]);
  }
  const bool a_returns = always_returns(a);
  const bool b_returns = has_else && always_returns(b);
  if (!rest.empty() && a_returns != b_returns) {
    Block& target = a_returns ? b : a;
    for (auto& r : rest) target.push_back(std::move(r));
    rest.clear();
    has_else = true;
  }
  Stmt out = Stmt::if_else(std::move(s.exprs[0]), normalize_block(std::move(a)), normalize_block(std::move(b)));
  fold_elif(out);
  return {std::move(out)};
}

inline Block normalize_block(Block block) {
  Block out;
  for (std::size_t i = 0; i < block.size(); ++i) {
    Stmt s = std::move(block[i]);
    if (s.kind == StmtKind::ForRange) {
      desugar_for(s, out);
      continue;
    }
    if (s.kind == StmtKind::If) {
      Block rest(std::make_move_iterator(block.begin() + static_cast<std::ptrdiff_t>(i) + 1),
                 std::make_move_iterator(block.end()));
      for (auto& e : normalize_if(std::move(s), rest)) out.push_back(std::move(e));
      if (rest.empty()) return out;
      block = std::move(rest);
      i = static_cast<std::size_t>(-1);
      continue;
    }
    for (auto& b : s.bodies) b = normalize_block(std::move(b));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace detail

/// Canonical control-flow form shared by the flowchart round trip:
/// for-range loops become their while desugaring, `else: if` chains become
/// elif, and statements following `if c: A else: B` (B being the rest of an
/// elif chain) move into the one side that can fall through when the other
/// always returns. Behaviour is unchanged.
inline Program normalize(Program p) {
  p.body = detail::normalize_block(std::move(p.body));
  return p;
}

}  // namespace flowco::pymini
