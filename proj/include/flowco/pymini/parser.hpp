#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "flowco/error.hpp"
#include "flowco/pymini/ast.hpp"
#include "flowco/pymini/lexer.hpp"

namespace flowco::pymini {

/// True when every path through the block ends in a return statement.
inline bool always_returns(const Block& block) {
  if (block.empty()) return false;
  const Stmt& last = block.back();
  if (last.kind == StmtKind::Return) return true;
  if (last.kind != StmtKind::If || !last.has_else) return false;
  for (const auto& body : last.bodies) {
    if (!always_returns(body)) return false;
  }
  return true;
}

namespace detail {

inline constexpr std::string_view kUnsupportedKeywords[] = {
    "import", "from",   "class", "lambda", "try",   "except", "finally", "with",  "break",
    "continue", "pass", "global", "nonlocal", "del", "assert", "raise",  "yield", "async",
    "await",  "is",     "as"};

inline bool unsupported_keyword(std::string_view word) {
  for (auto k : kUnsupportedKeywords) {
    if (k == word) return true;
  }
  return false;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::string function_name)
      : toks_(std::move(tokens)), function_name_(std::move(function_name)) {}

  Program program() {
    skip_newlines();
    const Token& head = peek();
    if (head.kind == TokenKind::Name && head.text != "def") {
      if (unsupported_keyword(head.text)) unsupported(head, "'" + head.text + "' statement");
      unsupported(head, "top-level statement outside a function");
    }
    if (head.kind == TokenKind::Op && head.text == "@") unsupported(head, "decorator");
    expect_word("def");
    Program p;
    p.name = expect_identifier("function name");
    function_name_ = p.name;
    expect_op("(");
    if (!check_op(")")) {
      while (true) {
        const Token& t = peek();
        if (t.kind == TokenKind::Op && (t.text == "*" || t.text == "**")) unsupported(t, "variadic parameter");
        std::string param = expect_identifier("parameter name or ')'");
        if (is_builtin(param) || param == p.name) unsupported(t, "parameter shadows '" + param + "'");
        for (const auto& existing : p.params) {
          if (existing == param) syntax(t, "duplicate parameter '" + param + "'");
        }
        if (check_op("=")) unsupported(peek(), "default parameter value");
        if (check_op(":")) unsupported(peek(), "parameter annotation");
        p.params.push_back(std::move(param));
        if (check_op(")")) break;
        expect_op(",");
        if (check_op(")")) break;
      }
    }
    expect_op(")");
    if (check_op("->")) unsupported(peek(), "return annotation");
    expect_op(":");
    p.body = suite();
    skip_newlines();
    if (peek().kind != TokenKind::End) {
      const Token& t = peek();
      if (t.kind == TokenKind::Name && t.text == "def") unsupported(t, "multiple function definitions");
      unsupported(t, "top-level statement outside a function");
    }
    check_block(p.body);
    return p;
  }

  Stmt single_statement() {
    skip_newlines();
    Stmt s = statement();
    skip_newlines();
    if (peek().kind != TokenKind::End) syntax(peek(), "expected end of statement");
    return s;
  }

  Expr single_expression() {
    Expr e = expression();
    skip_newlines();
    if (peek().kind != TokenKind::End) syntax(peek(), "expected end of expression");
    return e;
  }

 private:
  // --- token helpers -----------------------------------------------------
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool check_op(std::string_view op) const { return peek().kind == TokenKind::Op && peek().text == op; }
  bool check_word(std::string_view w) const { return peek().kind == TokenKind::Name && peek().text == w; }
  bool accept_op(std::string_view op) {
    if (!check_op(op)) return false;
    next();
    return true;
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case TokenKind::Newline: return "end of line";
      case TokenKind::Indent: return "indent";
      case TokenKind::Dedent: return "dedent";
      case TokenKind::End: return "end of input";
      default: return "'" + t.text + "'";
    }
  }

  [[noreturn]] static void syntax(const Token& t, const std::string& msg) {
    throw SourceError(ErrorKind::SyntaxError, t.line, t.column, msg);
  }
  [[noreturn]] static void unsupported(const Token& t, const std::string& msg) {
    throw SourceError(ErrorKind::UnsupportedFeature, t.line, t.column, msg);
  }

  void expect_op(std::string_view op) {
    if (!check_op(op)) syntax(peek(), "expected '" + std::string(op) + "', got " + describe(peek()));
    next();
  }
  void expect_word(std::string_view w) {
    if (!check_word(w)) syntax(peek(), "expected '" + std::string(w) + "', got " + describe(peek()));
    next();
  }
  void expect_kind(TokenKind kind, std::string_view what) {
    if (peek().kind != kind) syntax(peek(), "expected " + std::string(what) + ", got " + describe(peek()));
    next();
  }
  std::string expect_identifier(std::string_view what) {
    const Token& t = peek();
    if (t.kind != TokenKind::Name || is_keyword(t.text)) {
      if (t.kind == TokenKind::Name && unsupported_keyword(t.text)) unsupported(t, "'" + t.text + "'");
      syntax(t, "expected " + std::string(what) + ", got " + describe(t));
    }
    next();
    return t.text;
  }
  void skip_newlines() {
    while (peek().kind == TokenKind::Newline) next();
  }

  // --- statements ----------------------------------------------------------
  Block suite() {
    if (peek().kind != TokenKind::Newline) unsupported(peek(), "statement on the same line as its header");
    next();
    skip_newlines();
    expect_kind(TokenKind::Indent, "an indented block");
    Block body;
    while (peek().kind != TokenKind::Dedent && peek().kind != TokenKind::End) {
      body.push_back(statement());
      skip_newlines();
    }
    expect_kind(TokenKind::Dedent, "dedent");
    return body;
  }

  void end_simple() {
    if (check_op(";")) unsupported(peek(), "multiple statements on one line");
    if (peek().kind != TokenKind::Newline && peek().kind != TokenKind::End) {
      syntax(peek(), "expected end of line, got " + describe(peek()));
    }
    if (peek().kind == TokenKind::Newline) next();
  }

  std::string assign_target(const Token& t) {
    if (!is_identifier(t.text)) syntax(t, "invalid assignment target");
    if (is_builtin(t.text)) unsupported(t, "assignment to builtin '" + t.text + "'");
    if (t.text == function_name_) unsupported(t, "assignment to the function name");
    return t.text;
  }

  Stmt statement() {
    const Token& t = peek();
    if (t.kind == TokenKind::Indent) syntax(t, "unexpected indent");
    if (t.kind == TokenKind::Op && t.text == "@") unsupported(t, "decorator");
    if (t.kind == TokenKind::Name) {
      if (unsupported_keyword(t.text)) unsupported(t, "'" + t.text + "' statement");
      if (t.text == "def") unsupported(t, "nested function definition");
      if (t.text == "if") return if_statement();
      if (t.text == "while") {
        next();
        Expr cond = expression();
        expect_op(":");
        Block body = suite();
        return Stmt::while_loop(std::move(cond), std::move(body));
      }
      if (t.text == "for") return for_statement();
      if (t.text == "return") {
        next();
        Stmt s = Stmt::ret();
        if (peek().kind != TokenKind::Newline && peek().kind != TokenKind::End) {
          s.exprs.push_back(expression());
          if (check_op(",")) unsupported(peek(), "tuple return");
        }
        end_simple();
        return s;
      }
      if (t.text == "elif" || t.text == "else") syntax(t, "'" + t.text + "' without matching 'if'");
      if (t.text == "print" && peek(1).kind == TokenKind::Op && peek(1).text == "(") {
        next();
        next();
        std::vector<Expr> args = call_arguments();
        end_simple();
        return Stmt::print(std::move(args));
      }
      if (is_identifier(t.text) && peek(1).kind == TokenKind::Op) {
        const std::string& op = peek(1).text;
        if (op == "=") {
          std::string target = assign_target(t);
          next();
          next();
          Expr value = expression();
          if (check_op("=")) unsupported(peek(), "chained assignment");
          if (check_op(",")) unsupported(peek(), "tuple assignment");
          end_simple();
          return Stmt::assign(std::move(target), std::move(value));
        }
        if (op == "+=" || op == "-=" || op == "*=" || op == "/=" || op == "//=" || op == "%=" || op == "**=") {
          std::string target = assign_target(t);
          next();
          next();
          Expr value = expression();
          end_simple();
          return Stmt::aug_assign(std::move(target), op, std::move(value));
        }
        if (op == ",") unsupported(peek(1), "tuple assignment");
        if (op == "." || op == "[") unsupported(peek(1), "attribute or subscript access");
      }
    }
    Expr e = expression();
    if (check_op("=")) unsupported(peek(), "assignment to a non-name target");
    end_simple();
    return Stmt::expr_stmt(std::move(e));
  }

  Stmt if_statement() {
    next();  // 'if'
    Stmt s{StmtKind::If, {}, {}, {}, {}, false};
    s.exprs.push_back(expression());
    expect_op(":");
    s.bodies.push_back(suite());
    skip_newlines();
    while (check_word("elif")) {
      next();
      s.exprs.push_back(expression());
      expect_op(":");
      s.bodies.push_back(suite());
      skip_newlines();
    }
    if (check_word("else")) {
      next();
      expect_op(":");
      s.bodies.push_back(suite());
      s.has_else = true;
    }
    return s;
  }

  Stmt for_statement() {
    const Token& head = next();  // 'for'
    const Token& var_tok = peek();
    if (var_tok.kind != TokenKind::Name || !is_identifier(var_tok.text)) {
      syntax(var_tok, "expected loop variable, got " + describe(var_tok));
    }
    std::string var = assign_target(var_tok);
    next();
    if (check_op(",")) unsupported(peek(), "tuple loop target");
    expect_word("in");
    if (!(check_word("range") && peek(1).kind == TokenKind::Op && peek(1).text == "(")) {
      unsupported(head, "for loop over something other than range()");
    }
    next();
    next();
    std::vector<Expr> args = call_arguments();
    if (args.empty() || args.size() > 3) unsupported(head, "range() takes 1 to 3 arguments");
    if (args.size() == 3 && literal_step(args[2]) == 0) {
      unsupported(head, "range() step must be a non-zero integer literal");
    }
    expect_op(":");
    Block body = suite();
    return Stmt::for_range(std::move(var), std::move(args), std::move(body));
  }

  // --- expressions ---------------------------------------------------------
  std::vector<Expr> call_arguments() {
    // '(' already consumed.
    std::vector<Expr> args;
    if (accept_op(")")) return args;
    while (true) {
      if (peek().kind == TokenKind::Name && peek(1).kind == TokenKind::Op && peek(1).text == "=") {
        unsupported(peek(), "keyword argument");
      }
      if (check_op("*") || check_op("**")) unsupported(peek(), "argument unpacking");
      args.push_back(expression());
      if (accept_op(")")) return args;
      expect_op(",");
      if (accept_op(")")) return args;
    }
  }

  Expr expression() {
    if (check_word("lambda")) unsupported(peek(), "lambda");
    Expr e = or_test();
    if (check_word("if")) unsupported(peek(), "conditional expression");
    return e;
  }

  Expr or_test() {
    Expr left = and_test();
    while (check_word("or")) {
      next();
      left = Expr::boolop("or", std::move(left), and_test());
    }
    return left;
  }

  Expr and_test() {
    Expr left = not_test();
    while (check_word("and")) {
      next();
      left = Expr::boolop("and", std::move(left), not_test());
    }
    return left;
  }

  Expr not_test() {
    if (check_word("not")) {
      next();
      return Expr::unary("not", not_test());
    }
    return comparison();
  }

  static bool is_compare_op(const Token& t) {
    if (t.kind != TokenKind::Op) return false;
    return t.text == "==" || t.text == "!=" || t.text == "<" || t.text == "<=" || t.text == ">" || t.text == ">=";
  }

  Expr comparison() {
    Expr left = arith();
    if (check_word("in") || check_word("is") || (check_word("not") && peek(1).text == "in")) {
      unsupported(peek(), "'" + peek().text + "' operator");
    }
    if (is_compare_op(peek())) {
      std::string op = next().text;
      Expr right = arith();
      if (is_compare_op(peek())) unsupported(peek(), "chained comparison");
      return Expr::compare(std::move(op), std::move(left), std::move(right));
    }
    return left;
  }

  Expr arith() {
    Expr left = term();
    while (check_op("+") || check_op("-")) {
      std::string op = next().text;
      left = Expr::binary(std::move(op), std::move(left), term());
    }
    return left;
  }

  Expr term() {
    Expr left = factor();
    while (check_op("*") || check_op("/") || check_op("//") || check_op("%")) {
      std::string op = next().text;
      left = Expr::binary(std::move(op), std::move(left), factor());
    }
    if (check_op("@") || check_op("&") || check_op("|") || check_op("^") || check_op("<<") || check_op(">>")) {
      unsupported(peek(), "operator '" + peek().text + "'");
    }
    return left;
  }

  Expr factor() {
    if (check_op("-") || check_op("+")) {
      std::string op = next().text;
      return Expr::unary(std::move(op), factor());
    }
    if (check_op("~")) unsupported(peek(), "operator '~'");
    return power();
  }

  Expr power() {
    Expr base = atom();
    if (check_op("**")) {
      next();
      return Expr::binary("**", std::move(base), factor());
    }
    return base;
  }

  Expr atom() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Int: {
        next();
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
          unsupported(t, "integer literal out of 64-bit range");
        }
        return Expr::integer(v);
      }
      case TokenKind::String: {
        next();
        if (peek().kind == TokenKind::String) unsupported(peek(), "implicit string concatenation");
        return Expr::string(t.value);
      }
      case TokenKind::Name: {
        if (t.text == "True" || t.text == "False") {
          next();
          return Expr::boolean(t.text == "True");
        }
        if (t.text == "None") {
          next();
          return Expr::none();
        }
        if (unsupported_keyword(t.text)) unsupported(t, "'" + t.text + "'");
        if (is_keyword(t.text)) syntax(t, "unexpected keyword " + describe(t));
        next();
        if (check_op("(")) {
          next();
          if (t.text == "print") unsupported(t, "print() used as an expression");
          if (t.text == "range") unsupported(t, "range() outside a for loop");
          if (!is_builtin(t.text) && t.text != function_name_) {
            unsupported(t, "call to undefined function '" + t.text + "'");
          }
          std::vector<Expr> args = call_arguments();
          if (check_op("(")) unsupported(peek(), "calling a call result");
          return Expr::call(t.text, std::move(args));
        }
        if (check_op(".") || check_op("[")) unsupported(peek(), "attribute or subscript access");
        return Expr::name(t.text);
      }
      case TokenKind::Op: {
        if (t.text == "(") {
          next();
          if (check_op(")")) unsupported(t, "tuple literal");
          Expr inner = expression();
          if (check_op(",")) unsupported(peek(), "tuple literal");
          expect_op(")");
          inner.parens += 1;
          return inner;
        }
        if (t.text == "[" || t.text == "{") unsupported(t, "list, dict or set literal");
        syntax(t, "expected an expression, got " + describe(t));
      }
      default:
        syntax(t, "expected an expression, got " + describe(t));
    }
  }

  // Value of a literal range step (optionally negated); 0 when not literal.
  static std::int64_t literal_step(const Expr& e) {
    if (e.kind == ExprKind::IntLit) return e.value;
    if (e.kind == ExprKind::Unary && e.text == "-" && e.args[0].kind == ExprKind::IntLit && e.args[0].parens == 0) {
      return -e.args[0].value;
    }
    return 0;
  }

  // Rejects statements that can never run: code after an always-returning
  // statement, and loops whose body returns on every path.
  void check_block(const Block& block) const {
    for (std::size_t i = 0; i < block.size(); ++i) {
      const Stmt& s = block[i];
      if (i + 1 < block.size() && (s.kind == StmtKind::Return || always_returns({s}))) {
        throw Error(ErrorKind::UnsupportedFeature, "unreachable statement after return");
      }
      if ((s.kind == StmtKind::While || s.kind == StmtKind::ForRange) && always_returns(s.bodies[0])) {
        throw Error(ErrorKind::UnsupportedFeature, "loop body returns on every path");
      }
      for (const auto& body : s.bodies) check_block(body);
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::string function_name_;

};

}  // namespace detail

/// Parses a complete PyMini program (exactly one function definition).
inline Program parse(std::string_view source) {
  return detail::Parser(tokenize(source), "").program();
}

/// Parses one statement fragment, as found inside a flowchart block.
/// `function_name` names the enclosing function for self-calls.
inline Stmt parse_statement(std::string_view source, std::string function_name = "") {
  return detail::Parser(tokenize(source), std::move(function_name)).single_statement();
}

inline Expr parse_expression(std::string_view source, std::string function_name = "") {
  return detail::Parser(tokenize(source), std::move(function_name)).single_expression();
}

/// Step of a range() call given its argument list (1 when omitted).
inline std::int64_t range_step(const std::vector<Expr>& args) {
  if (args.size() < 3) return 1;
  const Expr& e = args[2];
  if (e.kind == ExprKind::IntLit) return e.value;
  if (e.kind == ExprKind::Unary && e.text == "-" && e.args[0].kind == ExprKind::IntLit) return -e.args[0].value;
  return 0;
}

}  // namespace flowco::pymini
