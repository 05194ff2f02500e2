#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace agile::parser {

struct SourceLoc {
  int line = 1;
  int column = 1;
};

enum class ScalarType { Void, Int, Float, Double };

std::string_view to_string(ScalarType type);

// Nodes are immutable once built and shared between copies of a FunctionUnit.
enum class ExprKind {
  IntLiteral,    // text = spelling
  FloatLiteral,  // text = spelling, optional f suffix
  Name,          // text = identifier
  Subscript,     // text = array identifier, args = indices (1 or 2)
  Unary,         // text = prefix operator (- + ! ++ --), args[0]
  Postfix,       // text = ++ or --, args[0]
  Binary,        // text = operator, args = {lhs, rhs}
  Assign,        // text = = or compound form, args = {target, value}
  Ternary,       // args = {cond, then, else}
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind = ExprKind::IntLiteral;
  std::string text;
  std::vector<ExprPtr> args;
  SourceLoc loc;
};

enum class StmtKind { Empty, Expr, Decl, Block, If, For, Return };

struct Declarator {
  std::string name;
  std::vector<ExprPtr> dims;  // IntLiteral or Name, at most two
  ExprPtr init;               // may be null
};

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct Stmt {
  StmtKind kind = StmtKind::Empty;
  SourceLoc loc;
  std::vector<ExprPtr> exprs;        // Expr: comma list; Return: zero or one value
  ScalarType decl_type = ScalarType::Int;
  std::vector<Declarator> decls;     // Decl
  std::vector<StmtPtr> children;     // Block
  ExprPtr cond;                      // If, For (never null for a parsed For)
  StmtPtr init;                      // For: Decl or Expr statement, may be null
  std::vector<ExprPtr> step;         // For
  StmtPtr then_branch;               // If
  StmtPtr else_branch;               // If, may be null
  StmtPtr body;                      // For
};

enum class ParamShape { Scalar, Array1D, Array2D };

struct Param {
  std::string name;
  ScalarType elem = ScalarType::Int;
  std::vector<ExprPtr> dims;

  ParamShape shape() const;
  /// One of scalar-int, scalar-float, array-1d, array-2d.
  std::string_view tag() const;
};

struct TripCount {
  enum class Kind { Known, Symbolic };
  Kind kind = Kind::Symbolic;
  std::uint64_t value = 0;  // meaningful only for Known

  static TripCount known(std::uint64_t n) { return {Kind::Known, n}; }
  static TripCount symbolic() { return {Kind::Symbolic, 0}; }
  bool is_known() const { return kind == Kind::Known; }
  friend bool operator==(const TripCount&, const TripCount&) = default;
};

struct OpCounts {
  int logical_ops = 0;
  int arith_ops = 0;
  int branches = 0;
  int arrays = 0;   // distinct array identifiers
  int scalars = 0;  // distinct scalar identifiers
  friend bool operator==(const OpCounts&, const OpCounts&) = default;
};

struct LoopNest {
  int depth = 1;
  std::vector<TripCount> trip_counts;     // outermost first along the deepest path
  OpCounts body_counts;
  std::vector<std::string> loop_vars;     // induction variables of every loop in the nest
  SourceLoc loc;
};

struct FunctionUnit {
  std::string name;
  ScalarType return_type = ScalarType::Void;
  std::vector<Param> params;
  StmtPtr body;                           // always a Block
  std::vector<LoopNest> loop_nests;       // textual order
  OpCounts nonloop_counts;
  SourceLoc loc;
};

/// Deep comparison ignoring source locations.
bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const Stmt& a, const Stmt& b);
bool structurally_equal(const FunctionUnit& a, const FunctionUnit& b);

} // namespace agile::parser
