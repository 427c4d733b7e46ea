#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace flowco::pymini {

enum class ExprKind { IntLit, BoolLit, StrLit, NoneLit, Name, Unary, Binary, Compare, BoolOp, Call };

/// Expression node. `text` holds the identifier, operator, callee name or
/// decoded string literal depending on kind; `parens` counts the wrapping
/// parentheses written in the source so printing reproduces them verbatim.
struct Expr {
  ExprKind kind = ExprKind::NoneLit;
  std::string text;
  std::int64_t value = 0;  // IntLit value, BoolLit 0/1
  std::vector<Expr> args;  // operands or call arguments
  int parens = 0;

  bool operator==(const Expr&) const = default;

  static Expr integer(std::int64_t v) { return Expr{ExprKind::IntLit, {}, v, {}, 0}; }
  static Expr boolean(bool v) { return Expr{ExprKind::BoolLit, {}, v ? 1 : 0, {}, 0}; }
  static Expr string(std::string s) { return Expr{ExprKind::StrLit, std::move(s), 0, {}, 0}; }
  static Expr none() { return Expr{ExprKind::NoneLit, {}, 0, {}, 0}; }
  static Expr name(std::string n) { return Expr{ExprKind::Name, std::move(n), 0, {}, 0}; }
  static Expr unary(std::string op, Expr e) { return Expr{ExprKind::Unary, std::move(op), 0, {std::move(e)}, 0}; }
  static Expr binary(std::string op, Expr l, Expr r) {
    return Expr{ExprKind::Binary, std::move(op), 0, {std::move(l), std::move(r)}, 0};
  }
  static Expr compare(std::string op, Expr l, Expr r) {
    return Expr{ExprKind::Compare, std::move(op), 0, {std::move(l), std::move(r)}, 0};
  }
  static Expr boolop(std::string op, Expr l, Expr r) {
    return Expr{ExprKind::BoolOp, std::move(op), 0, {std::move(l), std::move(r)}, 0};
  }
  static Expr call(std::string callee, std::vector<Expr> args) {
    return Expr{ExprKind::Call, std::move(callee), 0, std::move(args), 0};
  }
};

enum class StmtKind { Assign, AugAssign, ExprStmt, Return, Print, If, While, ForRange };

/// Statement node.
///   Assign / AugAssign: target, op ("=" or "+=" ...), exprs = {value}
///   ExprStmt: exprs = {e};  Return: exprs = {} or {e};  Print: exprs = args
///   If: exprs = {if-cond, elif-conds...}, bodies = one per cond, plus the
///       else body last when has_else
///   While: exprs = {cond}, bodies = {body}
///   ForRange: target = loop variable, exprs = range args (1..3), bodies = {body}
struct Stmt {
  StmtKind kind = StmtKind::ExprStmt;
  std::string target;
  std::string op;
  std::vector<Expr> exprs;
  std::vector<std::vector<Stmt>> bodies;
  bool has_else = false;

  bool operator==(const Stmt&) const = default;

  static Stmt assign(std::string target, Expr value) {
    return Stmt{StmtKind::Assign, std::move(target), "=", {std::move(value)}, {}, false};
  }
  static Stmt aug_assign(std::string target, std::string op, Expr value) {
    return Stmt{StmtKind::AugAssign, std::move(target), std::move(op), {std::move(value)}, {}, false};
  }
  static Stmt expr_stmt(Expr e) { return Stmt{StmtKind::ExprStmt, {}, {}, {std::move(e)}, {}, false}; }
  static Stmt ret() { return Stmt{StmtKind::Return, {}, {}, {}, {}, false}; }
  static Stmt ret(Expr e) { return Stmt{StmtKind::Return, {}, {}, {std::move(e)}, {}, false}; }
  static Stmt print(std::vector<Expr> args) { return Stmt{StmtKind::Print, {}, {}, std::move(args), {}, false}; }
  static Stmt while_loop(Expr cond, std::vector<Stmt> body) {
    return Stmt{StmtKind::While, {}, {}, {std::move(cond)}, {std::move(body)}, false};
  }
  static Stmt if_else(Expr cond, std::vector<Stmt> then_body, std::vector<Stmt> else_body = {}) {
    Stmt s{StmtKind::If, {}, {}, {std::move(cond)}, {std::move(then_body)}, false};
    if (!else_body.empty()) {
      s.bodies.push_back(std::move(else_body));
      s.has_else = true;
    }
    return s;
  }
  static Stmt for_range(std::string var, std::vector<Expr> range_args, std::vector<Stmt> body) {
    return Stmt{StmtKind::ForRange, std::move(var), {}, std::move(range_args), {std::move(body)}, false};
  }

  /// Number of condition-guarded branches of an If (if + elifs).
  std::size_t branch_count() const { return exprs.size(); }
  const std::vector<Stmt>* else_body() const { return has_else ? &bodies.back() : nullptr; }
};

using Block = std::vector<Stmt>;

struct Program {
  std::string name;
  std::vector<std::string> params;
  Block body;

  bool operator==(const Program&) const = default;
};

inline constexpr std::array<std::string_view, 6> kBuiltins{"len", "abs", "min", "max", "range", "print"};

inline bool is_builtin(std::string_view name) {
  for (auto b : kBuiltins) {
    if (b == name) return true;
  }
  return false;
}

/// Python 3 reserved words (including soft-keyword-free core set).
inline constexpr std::array<std::string_view, 35> kPythonKeywords{
    "False", "None",   "True",    "and",      "as",       "assert", "async",  "await",    "break",
    "class", "continue", "def",   "del",      "elif",     "else",   "except", "finally",  "for",
    "from",  "global", "if",      "import",   "in",       "is",     "lambda", "nonlocal", "not",
    "or",    "pass",   "raise",   "return",   "try",      "while",  "with",   "yield"};

inline bool is_keyword(std::string_view word) {
  for (auto k : kPythonKeywords) {
    if (k == word) return true;
  }
  return false;
}

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s.front());
  if (!(std::isalpha(head) || head == '_')) return false;
  for (unsigned char c : s) {
    if (!(std::isalnum(c) || c == '_')) return false;
  }
  return !is_keyword(s);
}

}  // namespace flowco::pymini
