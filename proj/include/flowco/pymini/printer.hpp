#pragma once

#include <string>
#include <string_view>

#include "flowco/pymini/ast.hpp"

namespace flowco::pymini {

namespace detail {

// Binding strength, loosest first.
enum Prec : int { kOr = 1, kAnd, kNot, kCompare, kSum, kProduct, kUnary, kPower, kAtom };

inline int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::BoolOp: return e.text == "or" ? kOr : kAnd;
    case ExprKind::Unary: return e.text == "not" ? kNot : kUnary;
    case ExprKind::Compare: return kCompare;
    case ExprKind::Binary:
      if (e.text == "+" || e.text == "-") return kSum;
      if (e.text == "**") return kPower;
      return kProduct;
    default: return kAtom;
  }
}

inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

void print_expr(const Expr& e, std::string& out, int min_prec);

inline void print_inner(const Expr& e, std::string& out) {
  switch (e.kind) {
    case ExprKind::IntLit: out += std::to_string(e.value); break;
    case ExprKind::BoolLit: out += e.value ? "True" : "False"; break;
    case ExprKind::NoneLit: out += "None"; break;
    case ExprKind::StrLit: out += quote(e.text); break;
    case ExprKind::Name: out += e.text; break;
    case ExprKind::Unary:
      out += e.text;
      if (e.text == "not") {
        out += ' ';
        print_expr(e.args[0], out, kNot);
      } else {
        print_expr(e.args[0], out, kUnary);
      }
      break;
    case ExprKind::Binary: {
      const int p = precedence(e);
      if (e.text == "**") {
        print_expr(e.args[0], out, p + 1);
        out += " ** ";
        print_expr(e.args[1], out, kUnary);
      } else {
        print_expr(e.args[0], out, p);
        out += ' ' + e.text + ' ';
        print_expr(e.args[1], out, p + 1);
      }
      break;
    }
    case ExprKind::Compare:
      print_expr(e.args[0], out, kCompare + 1);
      out += ' ' + e.text + ' ';
      print_expr(e.args[1], out, kCompare + 1);
      break;
    case ExprKind::BoolOp: {
      const int p = precedence(e);
      print_expr(e.args[0], out, p);
      out += ' ' + e.text + ' ';
      print_expr(e.args[1], out, p + 1);
      break;
    }
    case ExprKind::Call:
      out += e.text;
      out += '(';
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        print_expr(e.args[i], out, 0);
      }
      out += ')';
      break;
  }
}

// Source parentheses are reproduced verbatim; one extra pair is added only
// when a hand-built tree would otherwise print with a different meaning.
inline void print_expr(const Expr& e, std::string& out, int min_prec) {
  const bool needed = e.parens == 0 && precedence(e) < min_prec;
  const int wraps = e.parens + (needed ? 1 : 0);
  out.append(static_cast<std::size_t>(wraps), '(');
  print_inner(e, out);
  out.append(static_cast<std::size_t>(wraps), ')');
}

inline void print_block(const Block& block, int depth, std::string& out);

inline void print_stmt(const Stmt& s, int depth, std::string& out) {
  const std::string indent(static_cast<std::size_t>(depth) * 4, ' ');
  auto expr = [](const Expr& e) {
    std::string t;
    print_expr(e, t, 0);
    return t;
  };
  switch (s.kind) {
    case StmtKind::Assign: out += indent + s.target + " = " + expr(s.exprs[0]) + "\n"; break;
    case StmtKind::AugAssign: out += indent + s.target + " " + s.op + " " + expr(s.exprs[0]) + "\n"; break;
    case StmtKind::ExprStmt: out += indent + expr(s.exprs[0]) + "\n"; break;
    case StmtKind::Return:
      out += indent + (s.exprs.empty() ? std::string("return") : "return " + expr(s.exprs[0])) + "\n";
      break;
    case StmtKind::Print: {
      out += indent + "print(";
      for (std::size_t i = 0; i < s.exprs.size(); ++i) {
        if (i) out += ", ";
        out += expr(s.exprs[i]);
      }
      out += ")\n";
      break;
    }
    case StmtKind::If:
      for (std::size_t i = 0; i < s.exprs.size(); ++i) {
        out += indent + (i == 0 ? "if " : "elif ") + expr(s.exprs[i]) + ":\n";
        print_block(s.bodies[i], depth + 1, out);
      }
      if (s.has_else) {
        out += indent + "else:\n";
        print_block(s.bodies.back(), depth + 1, out);
      }
      break;
    case StmtKind::While:
      out += indent + "while " + expr(s.exprs[0]) + ":\n";
      print_block(s.bodies[0], depth + 1, out);
      break;
    case StmtKind::ForRange: {
      out += indent + "for " + s.target + " in range(";
      for (std::size_t i = 0; i < s.exprs.size(); ++i) {
        if (i) out += ", ";
        out += expr(s.exprs[i]);
      }
      out += "):\n";
      print_block(s.bodies[0], depth + 1, out);
      break;
    }
  }
}

inline void print_block(const Block& block, int depth, std::string& out) {
  for (const auto& s : block) print_stmt(s, depth, out);
}

}  // namespace detail

inline std::string print_expr(const Expr& e) {
  std::string out;
  detail::print_expr(e, out, 0);
  return out;
}

/// Statement text without indentation or trailing newline; compound
/// statements print their header line only.
inline std::string print_stmt_line(const Stmt& s) {
  std::string out;
  switch (s.kind) {
    case StmtKind::If: return "if " + print_expr(s.exprs[0]) + ":";
    case StmtKind::While: return "while " + print_expr(s.exprs[0]) + ":";
    case StmtKind::ForRange: {
      Stmt header = s;
      header.bodies = {{}};
      detail::print_stmt(header, 0, out);
      out.pop_back();
      return out;
    }
    default:
      detail::print_stmt(s, 0, out);
      out.pop_back();
      return out;
  }
}

/// Deterministic surface form: 4-space indents, single spaces around binary
/// operators, source parenthesization, trailing newline.
inline std::string print_canonical(const Program& p) {
  std::string out = "def " + p.name + "(";
  for (std::size_t i = 0; i < p.params.size(); ++i) {
    if (i) out += ", ";
    out += p.params[i];
  }
  out += "):\n";
  detail::print_block(p.body, 1, out);
  return out;
}

}  // namespace flowco::pymini
