#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "flowco/error.hpp"
#include "flowco/pymini/ast.hpp"

namespace flowco::pymini {

struct NoneValue {
  bool operator==(const NoneValue&) const = default;
};

/// Runtime value: None, 64-bit int, bool or string.
struct Value {
  std::variant<NoneValue, std::int64_t, bool, std::string> data;

  static Value none() { return Value{NoneValue{}}; }
  static Value integer(std::int64_t v) { return Value{v}; }
  static Value boolean(bool v) { return Value{v}; }
  static Value string(std::string s) { return Value{std::move(s)}; }

  bool is_none() const { return std::holds_alternative<NoneValue>(data); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(data); }
  bool is_bool() const { return std::holds_alternative<bool>(data); }
  bool is_str() const { return std::holds_alternative<std::string>(data); }
  bool is_numeric() const { return is_int() || is_bool(); }

  std::int64_t as_int() const { return is_bool() ? (std::get<bool>(data) ? 1 : 0) : std::get<std::int64_t>(data); }
  const std::string& as_str() const { return std::get<std::string>(data); }

  bool operator==(const Value&) const = default;

  /// Python str() of the value.
  std::string str() const {
    if (is_none()) return "None";
    if (is_bool()) return std::get<bool>(data) ? "True" : "False";
    if (is_int()) return std::to_string(std::get<std::int64_t>(data));
    return as_str();
  }

  /// Python repr()-like form, used for diagnostics and test output.
  std::string repr() const {
    if (is_str()) return "'" + as_str() + "'";
    return str();
  }
};

struct RunResult {
  Value return_value;
  std::string printed;

  bool operator==(const RunResult&) const = default;
};

inline constexpr std::uint64_t kDefaultStepLimit = 1'000'000;

namespace detail {

inline constexpr int kMaxCallDepth = 200;
inline constexpr std::size_t kMaxStringLength = 1'000'000;

class Interpreter {
 public:
  Interpreter(const Program& p, std::uint64_t step_limit) : program_(p), limit_(step_limit) {}

  RunResult run(const std::vector<Value>& args) {
    RunResult result;
    result.return_value = call(args, 0);
    result.printed = std::move(printed_);
    return result;
  }

 private:
  using Frame = std::map<std::string, Value, std::less<>>;
  enum class Flow { Normal, Returned };

  [[noreturn]] static void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

  void tick() {
    if (++steps_ > limit_) fail(ErrorKind::StepLimitExceeded, "exceeded " + std::to_string(limit_) + " steps");
  }

  Value call(const std::vector<Value>& args, int depth) {
    if (args.size() != program_.params.size()) {
      fail(ErrorKind::ArityMismatch, program_.name + "() takes " + std::to_string(program_.params.size()) +
                                         " arguments, got " + std::to_string(args.size()));
    }
    if (depth > kMaxCallDepth) fail(ErrorKind::StepLimitExceeded, "maximum recursion depth exceeded");
    Frame frame;
    for (std::size_t i = 0; i < args.size(); ++i) frame[program_.params[i]] = args[i];
    Value ret = Value::none();
    exec_block(program_.body, frame, ret, depth);
    return ret;
  }

  Flow exec_block(const Block& block, Frame& frame, Value& ret, int depth) {
    for (const auto& s : block) {
      if (exec(s, frame, ret, depth) == Flow::Returned) return Flow::Returned;
    }
    return Flow::Normal;
  }

  Flow exec(const Stmt& s, Frame& frame, Value& ret, int depth) {
    tick();
    switch (s.kind) {
      case StmtKind::Assign: frame[s.target] = eval(s.exprs[0], frame, depth); return Flow::Normal;
      case StmtKind::AugAssign: {
        Value current = lookup(frame, s.target);
        Value rhs = eval(s.exprs[0], frame, depth);
        frame[s.target] = binary(s.op.substr(0, s.op.size() - 1), current, rhs);
        return Flow::Normal;
      }
      case StmtKind::ExprStmt: eval(s.exprs[0], frame, depth); return Flow::Normal;
      case StmtKind::Return:
        ret = s.exprs.empty() ? Value::none() : eval(s.exprs[0], frame, depth);
        return Flow::Returned;
      case StmtKind::Print: {
        std::string line;
        for (std::size_t i = 0; i < s.exprs.size(); ++i) {
          if (i) line += ' ';
          line += eval(s.exprs[i], frame, depth).str();
        }
        printed_ += line + "\n";
        if (printed_.size() > kMaxStringLength) fail(ErrorKind::Overflow, "printed output too large");
        return Flow::Normal;
      }
      case StmtKind::If:
        for (std::size_t i = 0; i < s.exprs.size(); ++i) {
          if (truthy(eval(s.exprs[i], frame, depth))) return exec_block(s.bodies[i], frame, ret, depth);
        }
        if (s.has_else) return exec_block(s.bodies.back(), frame, ret, depth);
        return Flow::Normal;
      case StmtKind::While:
        while (truthy(eval(s.exprs[0], frame, depth))) {
          tick();
          if (exec_block(s.bodies[0], frame, ret, depth) == Flow::Returned) return Flow::Returned;
        }
        return Flow::Normal;
      case StmtKind::ForRange: {
        std::int64_t start = 0;
        std::int64_t stop = 0;
        std::int64_t step = 1;
        std::vector<std::int64_t> bounds;
        for (const auto& a : s.exprs) {
          Value v = eval(a, frame, depth);
          if (!v.is_numeric()) fail(ErrorKind::TypeMismatch, "range() arguments must be integers");
          bounds.push_back(v.as_int());
        }
        if (bounds.size() == 1) {
          stop = bounds[0];
        } else {
          start = bounds[0];
          stop = bounds[1];
          if (bounds.size() == 3) step = bounds[2];
        }
        if (step == 0) fail(ErrorKind::TypeMismatch, "range() step must not be zero");
        for (std::int64_t i = start; step > 0 ? i < stop : i > stop;) {
          tick();
          frame[s.target] = Value::integer(i);
          if (exec_block(s.bodies[0], frame, ret, depth) == Flow::Returned) return Flow::Returned;
          if (__builtin_add_overflow(i, step, &i)) break;
        }
        return Flow::Normal;
      }
    }
    return Flow::Normal;
  }

  static Value lookup(const Frame& frame, const std::string& name) {
    auto it = frame.find(name);
    if (it == frame.end()) fail(ErrorKind::UndefinedName, "name '" + name + "' is not defined");
    return it->second;
  }

  static bool truthy(const Value& v) {
    if (v.is_none()) return false;
    if (v.is_str()) return !v.as_str().empty();
    return v.as_int() != 0;
  }

  static std::int64_t add(std::int64_t a, std::int64_t b) {
    std::int64_t v = 0;
    if (__builtin_add_overflow(a, b, &v)) fail(ErrorKind::Overflow, "integer overflow");
    return v;
  }

  static std::int64_t sub(std::int64_t a, std::int64_t b) {
    std::int64_t v = 0;
    if (__builtin_sub_overflow(a, b, &v)) fail(ErrorKind::Overflow, "integer overflow");
    return v;
  }

  static std::int64_t mul(std::int64_t a, std::int64_t b) {
    std::int64_t v = 0;
    if (__builtin_mul_overflow(a, b, &v)) fail(ErrorKind::Overflow, "integer overflow");
    return v;
  }

  static std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    if (b == 0) fail(ErrorKind::DivisionByZero, "integer division or modulo by zero");
    if (a == std::numeric_limits<std::int64_t>::min() && b == -1) fail(ErrorKind::Overflow, "integer overflow");
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
  }

  static std::int64_t floor_mod(std::int64_t a, std::int64_t b) {
    if (b == 0) fail(ErrorKind::DivisionByZero, "integer division or modulo by zero");
    if (b == -1) return 0;
    std::int64_t r = a % b;
    if (r != 0 && ((r < 0) != (b < 0))) r += b;
    return r;
  }

  static std::int64_t power(std::int64_t base, std::int64_t exp) {
    if (exp < 0) fail(ErrorKind::TypeMismatch, "negative exponent yields a float");
    std::int64_t result = 1;
    while (exp > 0) {
      if (exp & 1) result = mul(result, base);
      exp >>= 1;
      if (exp > 0) base = mul(base, base);
    }
    return result;
  }

  static std::string repeat(const std::string& s, std::int64_t n) {
    if (n <= 0 || s.empty()) return "";
    if (static_cast<std::uint64_t>(n) > kMaxStringLength / s.size()) fail(ErrorKind::Overflow, "string too large");
    std::string out;
    out.reserve(s.size() * static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) out += s;
    return out;
  }

  static Value binary(const std::string& op, const Value& l, const Value& r) {
    if (l.is_numeric() && r.is_numeric()) {
      const std::int64_t a = l.as_int();
      const std::int64_t b = r.as_int();
      if (op == "+") return Value::integer(add(a, b));
      if (op == "-") return Value::integer(sub(a, b));
      if (op == "*") return Value::integer(mul(a, b));
      if (op == "//") return Value::integer(floor_div(a, b));
      if (op == "%") return Value::integer(floor_mod(a, b));
      if (op == "**") return Value::integer(power(a, b));
      if (op == "/") {
        if (b == 0) fail(ErrorKind::DivisionByZero, "division by zero");
        if (floor_mod(a, b) != 0) fail(ErrorKind::TypeMismatch, "true division with a non-integral result");
        return Value::integer(floor_div(a, b));
      }
    }
    if (op == "+" && l.is_str() && r.is_str()) {
      if (l.as_str().size() + r.as_str().size() > kMaxStringLength) fail(ErrorKind::Overflow, "string too large");
      return Value::string(l.as_str() + r.as_str());
    }
    if (op == "*" && l.is_str() && r.is_numeric()) return Value::string(repeat(l.as_str(), r.as_int()));
    if (op == "*" && l.is_numeric() && r.is_str()) return Value::string(repeat(r.as_str(), l.as_int()));
    fail(ErrorKind::TypeMismatch, "unsupported operand types for " + op + ": " + l.repr() + ", " + r.repr());
  }

  static Value compare(const std::string& op, const Value& l, const Value& r) {
    if (op == "==" || op == "!=") {
      bool eq = false;
      if (l.is_numeric() && r.is_numeric()) {
        eq = l.as_int() == r.as_int();
      } else if (l.is_str() && r.is_str()) {
        eq = l.as_str() == r.as_str();
      } else {
        eq = l.is_none() && r.is_none();
      }
      return Value::boolean(op == "==" ? eq : !eq);
    }
    int cmp = 0;
    if (l.is_numeric() && r.is_numeric()) {
      cmp = l.as_int() < r.as_int() ? -1 : (l.as_int() > r.as_int() ? 1 : 0);
    } else if (l.is_str() && r.is_str()) {
      cmp = l.as_str().compare(r.as_str());
      cmp = cmp < 0 ? -1 : (cmp > 0 ? 1 : 0);
    } else {
      fail(ErrorKind::TypeMismatch, "'" + op + "' not supported between " + l.repr() + " and " + r.repr());
    }
    if (op == "<") return Value::boolean(cmp < 0);
    if (op == "<=") return Value::boolean(cmp <= 0);
    if (op == ">") return Value::boolean(cmp > 0);
    return Value::boolean(cmp >= 0);
  }

  Value builtin(const std::string& name, const std::vector<Value>& args) {
    if (name == "len") {
      if (args.size() != 1) fail(ErrorKind::ArityMismatch, "len() takes exactly one argument");
      if (!args[0].is_str()) fail(ErrorKind::TypeMismatch, "object of type " + args[0].repr() + " has no len()");
      return Value::integer(static_cast<std::int64_t>(args[0].as_str().size()));
    }
    if (name == "abs") {
      if (args.size() != 1) fail(ErrorKind::ArityMismatch, "abs() takes exactly one argument");
      if (!args[0].is_numeric()) fail(ErrorKind::TypeMismatch, "bad operand type for abs()");
      std::int64_t v = args[0].as_int();
      if (v == std::numeric_limits<std::int64_t>::min()) fail(ErrorKind::Overflow, "integer overflow");
      return Value::integer(v < 0 ? -v : v);
    }
    // min / max
    const bool is_min = name == "min";
    if (args.empty()) fail(ErrorKind::ArityMismatch, name + "() expected at least 1 argument");
    if (args.size() == 1) {
      if (!args[0].is_str()) fail(ErrorKind::TypeMismatch, name + "() argument is not iterable");
      const std::string& s = args[0].as_str();
      if (s.empty()) fail(ErrorKind::TypeMismatch, name + "() arg is an empty sequence");
      char best = s[0];
      for (char c : s) {
        if (is_min ? static_cast<unsigned char>(c) < static_cast<unsigned char>(best)
                   : static_cast<unsigned char>(c) > static_cast<unsigned char>(best)) {
          best = c;
        }
      }
      return Value::string(std::string(1, best));
    }
    Value best = args[0];
    for (std::size_t i = 1; i < args.size(); ++i) {
      const bool better = std::get<bool>(compare(is_min ? "<" : ">", args[i], best).data);
      if (better) best = args[i];
    }
    return best;
  }

  Value eval(const Expr& e, Frame& frame, int depth) {
    switch (e.kind) {
      case ExprKind::IntLit: return Value::integer(e.value);
      case ExprKind::BoolLit: return Value::boolean(e.value != 0);
      case ExprKind::StrLit: return Value::string(e.text);
      case ExprKind::NoneLit: return Value::none();
      case ExprKind::Name: return lookup(frame, e.text);
      case ExprKind::Unary: {
        Value v = eval(e.args[0], frame, depth);
        if (e.text == "not") return Value::boolean(!truthy(v));
        if (!v.is_numeric()) fail(ErrorKind::TypeMismatch, "bad operand type for unary " + e.text);
        if (e.text == "+") return Value::integer(v.as_int());
        if (v.as_int() == std::numeric_limits<std::int64_t>::min()) fail(ErrorKind::Overflow, "integer overflow");
        return Value::integer(-v.as_int());
      }
      case ExprKind::Binary: {
        Value l = eval(e.args[0], frame, depth);
        Value r = eval(e.args[1], frame, depth);
        return binary(e.text, l, r);
      }
      case ExprKind::Compare: {
        Value l = eval(e.args[0], frame, depth);
        Value r = eval(e.args[1], frame, depth);
        return compare(e.text, l, r);
      }
      case ExprKind::BoolOp: {
        Value l = eval(e.args[0], frame, depth);
        if (e.text == "and") return truthy(l) ? eval(e.args[1], frame, depth) : l;
        return truthy(l) ? l : eval(e.args[1], frame, depth);
      }
      case ExprKind::Call: {
        std::vector<Value> args;
        args.reserve(e.args.size());
        for (const auto& a : e.args) args.push_back(eval(a, frame, depth));
        tick();
        if (e.text == program_.name) return call(args, depth + 1);
        if (e.text == "len" || e.text == "abs" || e.text == "min" || e.text == "max") return builtin(e.text, args);
        fail(ErrorKind::UndefinedName, "name '" + e.text + "' is not callable");
      }
    }
    return Value::none();
  }

  const Program& program_;
  std::uint64_t limit_;
  std::uint64_t steps_ = 0;
  std::string printed_;
};

}  // namespace detail

/// Runs the program with call-by-value arguments. Output of print() is
/// captured; falling off the end returns None.
inline RunResult interpret(const Program& p, const std::vector<Value>& args,
                           std::uint64_t step_limit = kDefaultStepLimit) {
  return detail::Interpreter(p, step_limit).run(args);
}

}  // namespace flowco::pymini
