#pragma once

#include <string>

#include "agile/parser/ast.hpp"

namespace agile::parser {

// Canonical rendering: minimal parentheses, two-space indentation. Reparsing
// the output yields a structurally equal tree.
std::string print_expr(const Expr& expr);
std::string print_stmt(const Stmt& stmt, int indent = 0);
std::string print_signature(const FunctionUnit& fn);
std::string print_function(const FunctionUnit& fn);

} // namespace agile::parser
