#include "agile/parser/parser.hpp"

#include <array>
#include <charconv>
#include <stdexcept>

#include "agile/parser/analysis.hpp"
#include "agile/parser/lexer.hpp"

namespace agile::parser {

namespace {

struct Failure {
  SourceLoc loc;
  DiagKind kind;
  std::string message;
};

ExprPtr make_expr(ExprKind kind, std::string text, std::vector<ExprPtr> args, SourceLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->text = std::move(text);
  e->args = std::move(args);
  e->loc = loc;
  return e;
}

bool is_lvalue(const Expr& e) { return e.kind == ExprKind::Name || e.kind == ExprKind::Subscript; }

constexpr std::array<std::string_view, 6> kAssignOps = {"=", "+=", "-=", "*=", "/=", "%="};
constexpr std::array<std::string_view, 5> kBitwiseAssignOps = {"&=", "|=", "^=", "<<=", ">>="};
constexpr std::array<std::string_view, 5> kBitwiseOps = {"&", "|", "^", "<<", ">>"};

template <std::size_t N>
bool one_of(const Token& t, const std::array<std::string_view, N>& set) {
  if (t.kind != TokenKind::Punct) return false;
  for (auto s : set)
    if (t.text == s) return true;
  return false;
}

struct Level {
  std::array<std::string_view, 4> ops;
};

// Lowest to highest precedence.
constexpr std::array<Level, 6> kLevels = {{
    {{"||", "", "", ""}},
    {{"&&", "", "", ""}},
    {{"==", "!=", "", ""}},
    {{"<", "<=", ">", ">="}},
    {{"+", "-", "", ""}},
    {{"*", "/", "%", ""}},
}};

std::optional<ScalarType> type_keyword(const Token& t) {
  if (t.kind != TokenKind::Keyword) return std::nullopt;
  if (t.text == "void") return ScalarType::Void;
  if (t.text == "int") return ScalarType::Int;
  if (t.text == "float") return ScalarType::Float;
  if (t.text == "double") return ScalarType::Double;
  return std::nullopt;
}

class Parser {
 public:
  Parser(const SourceUnit& src, bool strict)
      : toks_(tokenize(src.text)), path_(src.path), strict_(strict) {}

  ParseResult run() {
    while (cur().kind != TokenKind::End) {
      if (cur().kind == TokenKind::Invalid) {
        report({cur().loc, DiagKind::Lexical, cur().text}, "");
        ++pos_;
        continue;
      }
      if (type_keyword(cur())) {
        top_level_definition();
      } else {
        report({cur().loc, DiagKind::Unsupported,
                "unsupported top-level construct starting with '" + cur().text + "'"},
               "");
        recover_top_level();
      }
    }
    return std::move(result_);
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t ahead = 1) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  Token take() {
    Token t = toks_[pos_];
    if (t.kind != TokenKind::End) ++pos_;
    return t;
  }
  bool accept(std::string_view punct) {
    if (cur().is_punct(punct)) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const Token& at, std::string message) {
    if (at.kind == TokenKind::Invalid) throw Failure{at.loc, DiagKind::Lexical, at.text};
    throw Failure{at.loc, DiagKind::Syntax, std::move(message)};
  }
  [[noreturn]] void unsupported(const Token& at, std::string message) {
    if (at.kind == TokenKind::Invalid) throw Failure{at.loc, DiagKind::Lexical, at.text};
    throw Failure{at.loc, DiagKind::Unsupported, std::move(message)};
  }

  void expect(std::string_view punct) {
    if (!accept(punct)) {
      const std::string got = cur().kind == TokenKind::End ? "end of input" : "'" + cur().text + "'";
      fail(cur(), "expected '" + std::string(punct) + "' but found " + got);
    }
  }

  std::string expect_identifier(std::string_view what) {
    if (cur().kind == TokenKind::Identifier) return take().text;
    if (cur().is_punct("*")) unsupported(cur(), "pointers are not supported");
    fail(cur(), "expected " + std::string(what));
  }

  void report(Failure f, const std::string& function) {
    Diagnostic d;
    d.path = path_;
    d.loc = f.loc;
    d.kind = f.kind;
    d.message = std::move(f.message);
    d.function = function;
    if (strict_) throw ParseError(std::move(d));
    result_.diagnostics.push_back(std::move(d));
  }

  // Index of the '}' matching the '{' at `open`, or npos.
  std::size_t matching_brace(std::size_t open) const {
    int depth = 0;
    for (std::size_t i = open; i < toks_.size(); ++i) {
      if (toks_[i].is_punct("{")) ++depth;
      if (toks_[i].is_punct("}") && --depth == 0) return i;
    }
    return std::string::npos;
  }

  void recover_top_level() {
    while (cur().kind != TokenKind::End) {
      if (accept(";")) return;
      if (cur().is_punct("{")) {
        const auto close = matching_brace(pos_);
        pos_ = close == std::string::npos ? toks_.size() - 1 : close + 1;
        return;
      }
      ++pos_;
    }
  }

  void top_level_definition() {
    std::string name;
    try {
      FunctionUnit fn;
      fn.loc = cur().loc;
      fn.return_type = *type_keyword(take());
      name = expect_identifier("function name");
      fn.name = name;
      if (!cur().is_punct("(")) {
        unsupported(cur(), "file-scope declarations are not supported");
      }
      take();
      parse_params(fn);
      if (accept(";")) return;  // prototype
      if (!cur().is_punct("{")) fail(cur(), "expected function body");
      const std::size_t close = matching_brace(pos_);
      if (close == std::string::npos) {
        report({cur().loc, DiagKind::Syntax, "unterminated function body"}, name);
        pos_ = toks_.size() - 1;
        return;
      }
      try {
        fn.body = parse_block();
        analyze(fn);
        result_.functions.push_back(std::move(fn));
      } catch (Failure& f) {
        pos_ = close + 1;
        report(std::move(f), name);
      }
    } catch (Failure& f) {
      report(std::move(f), name);
      recover_top_level();
    }
  }

  void parse_params(FunctionUnit& fn) {
    if (accept(")")) return;
    if (cur().is_keyword("void") && peek().is_punct(")")) {
      take();
      take();
      return;
    }
    while (true) {
      Param p;
      const auto type = type_keyword(cur());
      if (!type || *type == ScalarType::Void) {
        if (cur().kind == TokenKind::Keyword)
          unsupported(cur(), "parameter type '" + cur().text + "' is not supported");
        fail(cur(), "expected parameter type");
      }
      take();
      p.elem = *type;
      p.name = expect_identifier("parameter name");
      p.dims = parse_dims(true);
      fn.params.push_back(std::move(p));
      if (accept(")")) return;
      expect(",");
    }
  }

  std::vector<ExprPtr> parse_dims(bool parameter) {
    std::vector<ExprPtr> dims;
    while (cur().is_punct("[")) {
      const Token open = take();
      if (dims.size() == 2) unsupported(open, "arrays with more than two dimensions are not supported");
      const Token& t = cur();
      if (t.kind == TokenKind::Integer) {
        dims.push_back(int_literal(take()));
      } else if (t.kind == TokenKind::Identifier) {
        take();
        dims.push_back(make_expr(ExprKind::Name, t.text, {}, t.loc));
      } else if (t.is_punct("]")) {
        unsupported(t, parameter ? "array parameters need explicit extents"
                                 : "arrays need explicit extents");
      } else {
        unsupported(t, "array extents must be integer literals or identifiers");
      }
      expect("]");
    }
    return dims;
  }

  StmtPtr parse_block() {
    auto block = std::make_shared<Stmt>();
    block->kind = StmtKind::Block;
    block->loc = cur().loc;
    expect("{");
    while (!cur().is_punct("}")) {
      if (cur().kind == TokenKind::End) fail(cur(), "unexpected end of input in block");
      block->children.push_back(parse_statement());
    }
    take();
    return block;
  }

  StmtPtr parse_statement() {
    const Token& t = cur();
    if (t.is_punct("{")) return parse_block();
    if (t.is_punct(";")) {
      auto s = std::make_shared<Stmt>();
      s->kind = StmtKind::Empty;
      s->loc = take().loc;
      return s;
    }
    if (t.kind == TokenKind::Keyword) {
      if (t.text == "for") return parse_for();
      if (t.text == "if") return parse_if();
      if (t.text == "return") return parse_return();
      if (const auto type = type_keyword(t)) {
        if (*type == ScalarType::Void) unsupported(t, "void variables are not supported");
        auto s = parse_decl();
        expect(";");
        return s;
      }
      if (t.text == "while" || t.text == "do")
        unsupported(t, "'" + t.text + "' loops are not supported; use a for loop");
      if (t.text == "goto" || t.text == "switch" || t.text == "break" || t.text == "continue" ||
          t.text == "case" || t.text == "default")
        unsupported(t, "'" + t.text + "' is not supported");
      if (t.text == "else") fail(t, "'else' without a matching 'if'");
      unsupported(t, "'" + t.text + "' is not supported");
    }
    auto s = std::make_shared<Stmt>();
    s->kind = StmtKind::Expr;
    s->loc = t.loc;
    s->exprs = parse_expr_list();
    expect(";");
    return s;
  }

  StmtPtr parse_decl() {
    auto s = std::make_shared<Stmt>();
    s->kind = StmtKind::Decl;
    s->loc = cur().loc;
    s->decl_type = *type_keyword(take());
    while (true) {
      Declarator d;
      d.name = expect_identifier("variable name");
      d.dims = parse_dims(false);
      if (cur().is_punct("=")) {
        if (!d.dims.empty()) unsupported(cur(), "array initializers are not supported");
        take();
        d.init = parse_assign();
      }
      s->decls.push_back(std::move(d));
      if (!accept(",")) break;
    }
    return s;
  }

  StmtPtr parse_for() {
    auto s = std::make_shared<Stmt>();
    s->kind = StmtKind::For;
    s->loc = take().loc;
    expect("(");
    if (!cur().is_punct(";")) {
      if (type_keyword(cur())) {
        s->init = parse_decl();
      } else {
        auto init = std::make_shared<Stmt>();
        init->kind = StmtKind::Expr;
        init->loc = cur().loc;
        init->exprs = parse_expr_list();
        s->init = init;
      }
    }
    expect(";");
    if (cur().is_punct(";")) unsupported(cur(), "for loops without a condition are not supported");
    s->cond = parse_assign();
    expect(";");
    if (!cur().is_punct(")")) s->step = parse_expr_list();
    expect(")");
    s->body = parse_statement();
    return s;
  }

  StmtPtr parse_if() {
    auto s = std::make_shared<Stmt>();
    s->kind = StmtKind::If;
    s->loc = take().loc;
    expect("(");
    s->cond = parse_assign();
    expect(")");
    s->then_branch = parse_statement();
    if (cur().is_keyword("else")) {
      take();
      s->else_branch = parse_statement();
    }
    return s;
  }

  StmtPtr parse_return() {
    auto s = std::make_shared<Stmt>();
    s->kind = StmtKind::Return;
    s->loc = take().loc;
    if (!cur().is_punct(";")) s->exprs.push_back(parse_assign());
    expect(";");
    return s;
  }

  std::vector<ExprPtr> parse_expr_list() {
    std::vector<ExprPtr> out;
    out.push_back(parse_assign());
    while (accept(",")) out.push_back(parse_assign());
    return out;
  }

  ExprPtr parse_assign() {
    const Token start = cur();
    auto lhs = parse_ternary();
    if (one_of(cur(), kAssignOps)) {
      if (!is_lvalue(*lhs)) fail(start, "invalid assignment target");
      const Token op = take();
      auto rhs = parse_assign();
      return make_expr(ExprKind::Assign, op.text, {lhs, rhs}, op.loc);
    }
    if (one_of(cur(), kBitwiseAssignOps)) unsupported(cur(), "bitwise operators are not supported");
    return lhs;
  }

  ExprPtr parse_ternary() {
    auto cond = parse_binary(0);
    if (!cur().is_punct("?")) return cond;
    const Token q = take();
    auto then_value = parse_assign();
    expect(":");
    auto else_value = parse_ternary();
    return make_expr(ExprKind::Ternary, "?:", {cond, then_value, else_value}, q.loc);
  }

  ExprPtr parse_binary(std::size_t level) {
    if (level == kLevels.size()) return parse_unary();
    auto lhs = parse_binary(level + 1);
    while (true) {
      if (one_of(cur(), kBitwiseOps)) unsupported(cur(), "bitwise operators are not supported");
      bool matched = false;
      for (auto op : kLevels[level].ops) {
        if (!op.empty() && cur().is_punct(op)) {
          matched = true;
          break;
        }
      }
      if (!matched) return lhs;
      const Token op = take();
      auto rhs = parse_binary(level + 1);
      lhs = make_expr(ExprKind::Binary, op.text, {lhs, rhs}, op.loc);
    }
  }

  ExprPtr parse_unary() {
    const Token& t = cur();
    if (t.is_punct("-") || t.is_punct("+") || t.is_punct("!")) {
      const Token op = take();
      return make_expr(ExprKind::Unary, op.text, {parse_unary()}, op.loc);
    }
    if (t.is_punct("++") || t.is_punct("--")) {
      const Token op = take();
      const Token target = cur();
      auto operand = parse_unary();
      if (!is_lvalue(*operand)) fail(target, "operand of '" + op.text + "' must be a variable");
      return make_expr(ExprKind::Unary, op.text, {operand}, op.loc);
    }
    if (t.is_punct("&")) unsupported(t, "address-of is not supported (no pointers)");
    if (t.is_punct("*")) unsupported(t, "pointer dereference is not supported");
    if (t.is_punct("~")) unsupported(t, "bitwise operators are not supported");
    if (t.is_keyword("sizeof")) unsupported(t, "'sizeof' is not supported");
    return parse_postfix();
  }

  ExprPtr parse_postfix() {
    const Token start = cur();
    auto expr = parse_primary();
    if (cur().is_punct("(")) {
      if (expr->kind == ExprKind::Name) unsupported(start, "function calls are not supported");
      fail(cur(), "unexpected '('");
    }
    if (cur().is_punct("[")) {
      if (expr->kind != ExprKind::Name) unsupported(cur(), "only named arrays can be subscripted");
      std::vector<ExprPtr> indices;
      while (cur().is_punct("[")) {
        const Token open = take();
        if (indices.size() == 2)
          unsupported(open, "arrays with more than two dimensions are not supported");
        indices.push_back(parse_assign());
        expect("]");
      }
      expr = make_expr(ExprKind::Subscript, expr->text, std::move(indices), start.loc);
    }
    if (cur().is_punct("->") || cur().is_punct("."))
      unsupported(cur(), "member access is not supported");
    while (cur().is_punct("++") || cur().is_punct("--")) {
      if (!is_lvalue(*expr)) fail(cur(), "operand of '" + cur().text + "' must be a variable");
      const Token op = take();
      expr = make_expr(ExprKind::Postfix, op.text, {expr}, op.loc);
    }
    return expr;
  }

  ExprPtr int_literal(const Token& t) {
    long long value = 0;
    const bool hex = t.text.size() > 2 && (t.text[1] == 'x' || t.text[1] == 'X');
    const char* first = t.text.data() + (hex ? 2 : 0);
    const char* last = t.text.data() + t.text.size();
    auto [ptr, ec] = std::from_chars(first, last, value, hex ? 16 : 10);
    if (ec != std::errc{} || ptr != last)
      throw Failure{t.loc, DiagKind::Lexical, "integer literal out of range"};
    return make_expr(ExprKind::IntLiteral, t.text, {}, t.loc);
  }

  ExprPtr parse_primary() {
    const Token& t = cur();
    switch (t.kind) {
      case TokenKind::Integer: return int_literal(take());
      case TokenKind::Floating: {
        const Token lit = take();
        return make_expr(ExprKind::FloatLiteral, lit.text, {}, lit.loc);
      }
      case TokenKind::Identifier: {
        const Token name = take();
        return make_expr(ExprKind::Name, name.text, {}, name.loc);
      }
      case TokenKind::Punct:
        if (t.is_punct("(")) {
          take();
          if (type_keyword(cur())) unsupported(cur(), "casts are not supported");
          auto inner = parse_assign();
          expect(")");
          return inner;
        }
        break;
      case TokenKind::Keyword:
        if (type_keyword(t)) fail(t, "unexpected type name in expression");
        unsupported(t, "'" + t.text + "' is not supported in expressions");
      default: break;
    }
    const std::string got = t.kind == TokenKind::End ? "end of input" : "'" + t.text + "'";
    fail(t, "expected expression but found " + got);
  }

  std::vector<Token> toks_;
  std::string path_;
  bool strict_;
  std::size_t pos_ = 0;
  ParseResult result_;
};

} // namespace

ParseResult parse_unit(const SourceUnit& src, bool strict) {
  if (src.text.empty()) throw std::invalid_argument("empty source: " + src.path);
  return Parser(src, strict).run();
}

FunctionUnit parse_function(std::string_view text) {
  auto result = parse_unit(SourceUnit{"<string>", std::string(text)}, true);
  if (result.functions.size() != 1)
    throw std::invalid_argument("expected exactly one function, found " +
                                std::to_string(result.functions.size()));
  return std::move(result.functions.front());
}

} // namespace agile::parser
