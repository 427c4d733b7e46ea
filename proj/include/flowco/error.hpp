#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flowco {

enum class ErrorKind {
  InvalidGraph,
  SyntaxError,
  UnsupportedFeature,
  ArityMismatch,
  TypeMismatch,
  DivisionByZero,
  Overflow,
  StepLimitExceeded,
  UndefinedName,
  Unstructurable,
  FragmentParseError,
  MalformedEncoding,
  SplitLeakage,
  TextTooWide,
  LayoutError,
  DanglingArrow,
  AdapterFailure,
  MissingBranchLabel,
  InvalidAssembly,
  LengthMismatch,
  EmptyCorpus,
  ReferenceUnparseable,
  IdMismatch,
  AlreadySplit,
  ParseError,
  IoError,
  InvalidArgument,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidGraph: return "InvalidGraph";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnsupportedFeature: return "UnsupportedFeature";
    case ErrorKind::ArityMismatch: return "ArityMismatch";
    case ErrorKind::TypeMismatch: return "TypeMismatch";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::StepLimitExceeded: return "StepLimitExceeded";
    case ErrorKind::UndefinedName: return "UndefinedName";
    case ErrorKind::Unstructurable: return "Unstructurable";
    case ErrorKind::FragmentParseError: return "FragmentParseError";
    case ErrorKind::MalformedEncoding: return "MalformedEncoding";
    case ErrorKind::SplitLeakage: return "SplitLeakage";
    case ErrorKind::TextTooWide: return "TextTooWide";
    case ErrorKind::LayoutError: return "LayoutError";
    case ErrorKind::DanglingArrow: return "DanglingArrow";
    case ErrorKind::AdapterFailure: return "AdapterFailure";
    case ErrorKind::MissingBranchLabel: return "MissingBranchLabel";
    case ErrorKind::InvalidAssembly: return "InvalidAssembly";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::ReferenceUnparseable: return "ReferenceUnparseable";
    case ErrorKind::IdMismatch: return "IdMismatch";
    case ErrorKind::AlreadySplit: return "AlreadySplit";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the ErrorKind tags so
/// callers (and the CLI) can branch on the category without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Source-located error (lexer/parser). Line and column are 1-based.
class SourceError : public Error {
 public:
  SourceError(ErrorKind kind, int line, int column, const std::string& message)
      : Error(kind, std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace flowco
