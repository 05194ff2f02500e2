#pragma once

#include <string>
#include <vector>

#include "agile/parser/ast.hpp"
#include "agile/parser/diagnostics.hpp"

namespace agile::parser {

struct SourceUnit {
  std::string path;
  std::string text;
};

struct ParseResult {
  std::vector<FunctionUnit> functions;
  std::vector<Diagnostic> diagnostics;

  bool clean() const { return diagnostics.empty(); }
};

/// Parses every function definition in `src`. A function containing an
/// unsupported construct or a syntax error is skipped with a diagnostic; in
/// strict mode the first diagnostic is thrown as ParseError instead.
/// Prototypes are accepted and ignored. Throws std::invalid_argument on empty
/// input.
ParseResult parse_unit(const SourceUnit& src, bool strict = false);

/// Convenience for tests and tools: parses `text` strictly and returns the
/// single function it defines.
FunctionUnit parse_function(std::string_view text);

} // namespace agile::parser
