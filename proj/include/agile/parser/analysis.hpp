#pragma once

#include <optional>
#include <string_view>

#include "agile/parser/ast.hpp"

namespace agile::parser {

enum class OpClass { Logical, Arith, Branch, Neither };

std::string_view to_string(OpClass cls);

/// Maps an operator or control keyword to its feature class. Compound
/// assignments and increments count as arithmetic; "if", "?:" and "?" count
/// as one branch. Throws std::invalid_argument for tokens outside the grammar.
OpClass classify_operator(std::string_view token);

/// Integer value of a literal, optionally negated; nullopt otherwise.
std::optional<long long> int_constant(const Expr& expr);

/// Trip count of a for header: Known only for literal start, bound and stride
/// in a recognised induction form, Symbolic otherwise.
TripCount derive_trip_count(const Stmt& for_stmt);

/// Induction variable of a for header, if one can be identified.
std::optional<std::string> induction_variable(const Stmt& for_stmt);

/// Fills fn.loop_nests and fn.nonloop_counts from fn.body.
void analyze(FunctionUnit& fn);

} // namespace agile::parser
