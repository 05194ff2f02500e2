#include "agile/parser/printer.hpp"

namespace agile::parser {

namespace {

constexpr int kAssignPrec = 1;
constexpr int kTernaryPrec = 2;
constexpr int kUnaryPrec = 9;
constexpr int kPostfixPrec = 10;
constexpr int kPrimaryPrec = 11;

int binary_prec(const std::string& op) {
  if (op == "||") return 3;
  if (op == "&&") return 4;
  if (op == "==" || op == "!=") return 5;
  if (op == "<" || op == "<=" || op == ">" || op == ">=") return 6;
  if (op == "+" || op == "-") return 7;
  return 8;  // * / %
}

int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Assign: return kAssignPrec;
    case ExprKind::Ternary: return kTernaryPrec;
    case ExprKind::Binary: return binary_prec(e.text);
    case ExprKind::Unary: return kUnaryPrec;
    case ExprKind::Postfix: return kPostfixPrec;
    default: return kPrimaryPrec;
  }
}

void emit(std::string& out, const Expr& e);

void emit_child(std::string& out, const Expr& child, bool parenthesize) {
  if (parenthesize) out += '(';
  emit(out, child);
  if (parenthesize) out += ')';
}

void emit(std::string& out, const Expr& e) {
  switch (e.kind) {
    case ExprKind::IntLiteral:
    case ExprKind::FloatLiteral:
    case ExprKind::Name: out += e.text; return;
    case ExprKind::Subscript:
      out += e.text;
      for (const auto& index : e.args) {
        out += '[';
        emit(out, *index);
        out += ']';
      }
      return;
    case ExprKind::Unary: {
      out += e.text;
      const Expr& operand = *e.args[0];
      // "- -x" must not print as the decrement "--x".
      const bool clash = operand.kind == ExprKind::Unary && !operand.text.empty() &&
                         (operand.text[0] == '-' || operand.text[0] == '+') &&
                         operand.text[0] == e.text[0];
      emit_child(out, operand, clash || precedence(operand) < kUnaryPrec);
      return;
    }
    case ExprKind::Postfix:
      emit_child(out, *e.args[0], precedence(*e.args[0]) < kPostfixPrec);
      out += e.text;
      return;
    case ExprKind::Binary: {
      const int p = binary_prec(e.text);
      emit_child(out, *e.args[0], precedence(*e.args[0]) < p);
      out += ' ' + e.text + ' ';
      emit_child(out, *e.args[1], precedence(*e.args[1]) <= p);
      return;
    }
    case ExprKind::Assign:
      emit_child(out, *e.args[0], false);
      out += ' ' + e.text + ' ';
      emit_child(out, *e.args[1], false);
      return;
    case ExprKind::Ternary:
      emit_child(out, *e.args[0], precedence(*e.args[0]) <= kTernaryPrec);
      out += " ? ";
      emit_child(out, *e.args[1], false);
      out += " : ";
      emit_child(out, *e.args[2], precedence(*e.args[2]) < kTernaryPrec);
      return;
  }
}

std::string join_exprs(const std::vector<ExprPtr>& exprs) {
  std::string out;
  for (std::size_t i = 0; i < exprs.size(); ++i) {
    if (i) out += ", ";
    emit(out, *exprs[i]);
  }
  return out;
}

std::string dims_text(const std::vector<ExprPtr>& dims) {
  std::string out;
  for (const auto& d : dims) out += '[' + print_expr(*d) + ']';
  return out;
}

std::string decl_text(const Stmt& s) {
  std::string out(to_string(s.decl_type));
  out += ' ';
  for (std::size_t i = 0; i < s.decls.size(); ++i) {
    const auto& d = s.decls[i];
    if (i) out += ", ";
    out += d.name + dims_text(d.dims);
    if (d.init) out += " = " + print_expr(*d.init);
  }
  return out;
}

std::string pad(int indent) { return std::string(static_cast<std::size_t>(indent) * 2, ' '); }

std::string block_text(const Stmt& block, int indent) {
  std::string out = "{\n";
  for (const auto& child : block.children) out += print_stmt(*child, indent + 1);
  out += pad(indent) + "}";
  return out;
}

} // namespace

std::string print_expr(const Expr& expr) {
  std::string out;
  emit(out, expr);
  return out;
}

std::string print_stmt(const Stmt& s, int indent) {
  std::string out = pad(indent);
  switch (s.kind) {
    case StmtKind::Empty: out += ";\n"; break;
    case StmtKind::Expr: out += join_exprs(s.exprs) + ";\n"; break;
    case StmtKind::Decl: out += decl_text(s) + ";\n"; break;
    case StmtKind::Return:
      out += s.exprs.empty() ? "return;\n" : "return " + print_expr(*s.exprs[0]) + ";\n";
      break;
    case StmtKind::Block: out += block_text(s, indent) + "\n"; break;
    case StmtKind::If: {
      out += "if (" + print_expr(*s.cond) + ")";
      const auto branch = [&](const Stmt& b) {
        if (b.kind == StmtKind::Block) {
          out += ' ' + block_text(b, indent);
        } else {
          out += '\n' + print_stmt(b, indent + 1);
          if (out.back() == '\n') out.pop_back();
        }
      };
      branch(*s.then_branch);
      if (s.else_branch) {
        out += s.then_branch->kind == StmtKind::Block ? " else" : "\n" + pad(indent) + "else";
        branch(*s.else_branch);
      }
      out += '\n';
      break;
    }
    case StmtKind::For: {
      out += "for (";
      if (s.init) out += s.init->kind == StmtKind::Decl ? decl_text(*s.init) : join_exprs(s.init->exprs);
      out += "; " + print_expr(*s.cond) + ";";
      if (!s.step.empty()) out += ' ' + join_exprs(s.step);
      out += ")";
      if (s.body->kind == StmtKind::Block) {
        out += ' ' + block_text(*s.body, indent) + "\n";
      } else {
        out += '\n' + print_stmt(*s.body, indent + 1);
      }
      break;
    }
  }
  return out;
}

std::string print_signature(const FunctionUnit& fn) {
  std::string out(to_string(fn.return_type));
  out += ' ' + fn.name + '(';
  for (std::size_t i = 0; i < fn.params.size(); ++i) {
    const auto& p = fn.params[i];
    if (i) out += ", ";
    out += std::string(to_string(p.elem)) + ' ' + p.name + dims_text(p.dims);
  }
  out += ')';
  return out;
}

std::string print_function(const FunctionUnit& fn) {
  return print_signature(fn) + ' ' + block_text(*fn.body, 0) + "\n";
}

} // namespace agile::parser
