#include "agile/parser/ast.hpp"

#include "agile/parser/diagnostics.hpp"

namespace agile::parser {

std::string_view to_string(ScalarType type) {
  switch (type) {
    case ScalarType::Void: return "void";
    case ScalarType::Int: return "int";
    case ScalarType::Float: return "float";
    case ScalarType::Double: return "double";
  }
  return "?";
}

ParamShape Param::shape() const {
  switch (dims.size()) {
    case 0: return ParamShape::Scalar;
    case 1: return ParamShape::Array1D;
    default: return ParamShape::Array2D;
  }
}

std::string_view Param::tag() const {
  switch (shape()) {
    case ParamShape::Scalar: return elem == ScalarType::Int ? "scalar-int" : "scalar-float";
    case ParamShape::Array1D: return "array-1d";
    case ParamShape::Array2D: return "array-2d";
  }
  return "?";
}

namespace {

bool same(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return structurally_equal(*a, *b);
}

bool same(const StmtPtr& a, const StmtPtr& b) {
  if (!a || !b) return !a && !b;
  return structurally_equal(*a, *b);
}

template <typename T>
bool same_list(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same(a[i], b[i])) return false;
  return true;
}

} // namespace

bool structurally_equal(const Expr& a, const Expr& b) {
  return a.kind == b.kind && a.text == b.text && same_list(a.args, b.args);
}

bool structurally_equal(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case StmtKind::Empty: return true;
    case StmtKind::Expr:
    case StmtKind::Return: return same_list(a.exprs, b.exprs);
    case StmtKind::Decl: {
      if (a.decl_type != b.decl_type || a.decls.size() != b.decls.size()) return false;
      for (std::size_t i = 0; i < a.decls.size(); ++i) {
        const auto& x = a.decls[i];
        const auto& y = b.decls[i];
        if (x.name != y.name || !same_list(x.dims, y.dims) || !same(x.init, y.init)) return false;
      }
      return true;
    }
    case StmtKind::Block: return same_list(a.children, b.children);
    case StmtKind::If:
      return same(a.cond, b.cond) && same(a.then_branch, b.then_branch) &&
             same(a.else_branch, b.else_branch);
    case StmtKind::For:
      return same(a.init, b.init) && same(a.cond, b.cond) && same_list(a.step, b.step) &&
             same(a.body, b.body);
  }
  return false;
}

bool structurally_equal(const FunctionUnit& a, const FunctionUnit& b) {
  if (a.name != b.name || a.return_type != b.return_type || a.params.size() != b.params.size())
    return false;
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    const auto& p = a.params[i];
    const auto& q = b.params[i];
    if (p.name != q.name || p.elem != q.elem || !same_list(p.dims, q.dims)) return false;
  }
  if (!same(a.body, b.body) || a.nonloop_counts != b.nonloop_counts) return false;
  if (a.loop_nests.size() != b.loop_nests.size()) return false;
  for (std::size_t i = 0; i < a.loop_nests.size(); ++i) {
    const auto& m = a.loop_nests[i];
    const auto& n = b.loop_nests[i];
    if (m.depth != n.depth || m.trip_counts != n.trip_counts || m.body_counts != n.body_counts ||
        m.loop_vars != n.loop_vars)
      return false;
  }
  return true;
}

std::string_view to_string(Severity severity) {
  return severity == Severity::Error ? "error" : "warning";
}

std::string_view to_string(DiagKind kind) {
  switch (kind) {
    case DiagKind::Lexical: return "lexical";
    case DiagKind::Syntax: return "syntax";
    case DiagKind::Unsupported: return "unsupported";
  }
  return "?";
}

std::string Diagnostic::format() const {
  std::string out = path.empty() ? "<input>" : path;
  out += ':' + std::to_string(loc.line) + ':' + std::to_string(loc.column) + ": ";
  out += to_string(severity);
  out += ": ";
  out += message;
  if (!function.empty()) out += " (in function '" + function + "')";
  return out;
}

} // namespace agile::parser
