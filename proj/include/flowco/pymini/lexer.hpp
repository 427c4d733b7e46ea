#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "flowco/error.hpp"

namespace flowco::pymini {

enum class TokenKind { Name, Int, String, Op, Newline, Indent, Dedent, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;   // raw source text (string literals keep their quotes)
  std::string value;  // decoded string literal contents
  int line = 1;
  int column = 1;
};

/// Tokenizer for PyMini. Produces Python-style NEWLINE/INDENT/DEDENT tokens;
/// indentation must grow in steps of exactly four spaces, newlines inside
/// brackets are ignored, comments run to end of line.
class Lexer {
 public:
  explicit Lexer(std::string_view source) : src_(source) {}

  std::vector<Token> tokenize() {
    std::vector<Token> out;
    std::vector<int> indents{0};
    int depth = 0;  // bracket nesting
    bool at_line_start = true;

    while (pos_ < src_.size()) {
      if (at_line_start && depth == 0) {
        int width = 0;
        std::size_t p = pos_;
        while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t')) {
          if (src_[p] == '\t') throw SourceError(ErrorKind::SyntaxError, line_, col_ + width, "tab in indentation");
          ++width;
          ++p;
        }
        // Blank or comment-only line: skip without indentation bookkeeping.
        if (p >= src_.size() || src_[p] == '\n' || src_[p] == '#' || src_[p] == '\r') {
          while (p < src_.size() && src_[p] != '\n') ++p;
          advance_to(p);
          if (pos_ < src_.size()) {
            ++pos_;
            newline();
          }
          continue;
        }
        advance_to(p);
        if (width > indents.back()) {
          if (width != indents.back() + 4) {
            throw SourceError(ErrorKind::SyntaxError, line_, 1, "indentation must increase by 4 spaces");
          }
          indents.push_back(width);
          out.push_back({TokenKind::Indent, "", "", line_, 1});
        } else {
          while (width < indents.back()) {
            indents.pop_back();
            out.push_back({TokenKind::Dedent, "", "", line_, col_});
          }
          if (width != indents.back()) {
            throw SourceError(ErrorKind::SyntaxError, line_, col_, "unindent does not match any outer level");
          }
        }
        at_line_start = false;
      }

      const char c = src_[pos_];
      if (c == '\n') {
        if (depth == 0) {
          out.push_back({TokenKind::Newline, "", "", line_, col_});
          at_line_start = true;
        }
        ++pos_;
        newline();
        continue;
      }
      if (c == ' ' || c == '\r') {
        step();
        continue;
      }
      if (c == '\t') {
        step();
        continue;
      }
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') step();
        continue;
      }
      if (c == '\\') {
        throw SourceError(ErrorKind::UnsupportedFeature, line_, col_, "explicit line continuation");
      }

      const int tl = line_;
      const int tc = col_;
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) step();
        std::string word(src_.substr(start, pos_ - start));
        if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'')) {
          throw SourceError(ErrorKind::UnsupportedFeature, tl, tc, "string prefix '" + word + "'");
        }
        out.push_back({TokenKind::Name, word, "", tl, tc});
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) step();
        if (pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E' || src_[pos_] == 'j' ||
                                   src_[pos_] == 'x' || src_[pos_] == 'X' || src_[pos_] == 'b' || src_[pos_] == 'o' ||
                                   src_[pos_] == '_')) {
          throw SourceError(ErrorKind::UnsupportedFeature, tl, tc, "non-decimal or float literal");
        }
        std::string digits(src_.substr(start, pos_ - start));
        if (digits.size() > 1 && digits.front() == '0') {
          throw SourceError(ErrorKind::SyntaxError, tl, tc, "leading zeros in decimal integer literal");
        }
        out.push_back({TokenKind::Int, digits, "", tl, tc});
        continue;
      }
      if (c == '"' || c == '\'') {
        out.push_back(lex_string());
        continue;
      }
      if (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
        throw SourceError(ErrorKind::UnsupportedFeature, tl, tc, "float literal");
      }

      static constexpr std::string_view kThree[] = {"//=", "**="};
      static constexpr std::string_view kTwo[] = {"==", "!=", "<=", ">=", "//", "**", "+=", "-=", "*=", "/=", "%=", "->"};
      std::string_view rest = src_.substr(pos_);
      std::string op;
      for (auto t : kThree) {
        if (rest.substr(0, 3) == t) op = t;
      }
      if (op.empty()) {
        for (auto t : kTwo) {
          if (rest.substr(0, 2) == t) op = t;
        }
      }
      if (op.empty()) {
        static constexpr std::string_view kOne = "+-*/%<>=(),:[]{}.@&|^~;!";
        if (kOne.find(c) == std::string_view::npos) {
          throw SourceError(ErrorKind::SyntaxError, tl, tc, std::string("unexpected character '") + c + "'");
        }
        op = std::string(1, c);
      }
      if (op == "(" || op == "[" || op == "{") ++depth;
      if ((op == ")" || op == "]" || op == "}") && depth > 0) --depth;
      for (std::size_t i = 0; i < op.size(); ++i) step();
      out.push_back({TokenKind::Op, op, "", tl, tc});
    }

    if (!out.empty() && out.back().kind != TokenKind::Newline && depth == 0) {
      out.push_back({TokenKind::Newline, "", "", line_, col_});
    }
    auto [el, ec] = end_position();
    while (indents.size() > 1) {
      indents.pop_back();
      out.push_back({TokenKind::Dedent, "", "", el, ec});
    }
    out.push_back({TokenKind::End, "", "", el, ec});
    return out;
  }

 private:
  void step() {
    ++pos_;
    ++col_;
  }
  void newline() {
    ++line_;
    col_ = 1;
  }
  void advance_to(std::size_t p) {
    col_ += static_cast<int>(p - pos_);
    pos_ = p;
  }

  /// Position just past the last non-whitespace character of the source.
  std::pair<int, int> end_position() const {
    int line = 1;
    int col = 1;
    int end_line = 1;
    int end_col = 1;
    for (char c : src_) {
      if (c == '\n') {
        ++line;
        col = 1;
        continue;
      }
      ++col;
      if (c != ' ' && c != '\t' && c != '\r') {
        end_line = line;
        end_col = col;
      }
    }
    return {end_line, end_col};
  }

  Token lex_string() {
    const int tl = line_;
    const int tc = col_;
    const char quote = src_[pos_];
    if (src_.substr(pos_, 3) == std::string(3, quote)) {
      throw SourceError(ErrorKind::UnsupportedFeature, tl, tc, "triple-quoted string");
    }
    std::size_t start = pos_;
    step();
    std::string value;
    while (true) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') {
        throw SourceError(ErrorKind::SyntaxError, tl, tc, "unterminated string literal");
      }
      char c = src_[pos_];
      if (c == quote) {
        step();
        break;
      }
      if (c == '\\') {
        step();
        if (pos_ >= src_.size()) throw SourceError(ErrorKind::SyntaxError, tl, tc, "unterminated string literal");
        char e = src_[pos_];
        switch (e) {
          case 'n': value += '\n'; break;
          case 't': value += '\t'; break;
          case '\\': value += '\\'; break;
          case '\'': value += '\''; break;
          case '"': value += '"'; break;
          default:
            throw SourceError(ErrorKind::UnsupportedFeature, line_, col_ - 1, std::string("escape sequence \\") + e);
        }
        step();
        continue;
      }
      value += c;
      step();
    }
    return {TokenKind::String, std::string(src_.substr(start, pos_ - start)), value, tl, tc};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

inline std::vector<Token> tokenize(std::string_view source) { return Lexer(source).tokenize(); }

}  // namespace flowco::pymini
