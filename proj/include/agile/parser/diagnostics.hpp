#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "agile/parser/ast.hpp"

namespace agile::parser {

enum class Severity { Warning, Error };
enum class DiagKind { Lexical, Syntax, Unsupported };

struct Diagnostic {
  std::string path;
  SourceLoc loc;
  Severity severity = Severity::Error;
  DiagKind kind = DiagKind::Syntax;
  std::string message;
  std::string function;  // enclosing function, empty at file scope

  /// path:line:column: severity: message
  std::string format() const;
};

std::string_view to_string(Severity severity);
std::string_view to_string(DiagKind kind);

/// Raised by strict parsing on the first diagnostic.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(Diagnostic diag)
      : std::runtime_error(diag.format()), diag_(std::move(diag)) {}
  const Diagnostic& diagnostic() const { return diag_; }

 private:
  Diagnostic diag_;
};

} // namespace agile::parser
