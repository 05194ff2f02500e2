#include "agile/parser/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

#include "agile/parser/printer.hpp"

namespace agile::parser {

std::string_view to_string(OpClass cls) {
  switch (cls) {
    case OpClass::Logical: return "logical";
    case OpClass::Arith: return "arith";
    case OpClass::Branch: return "branch";
    case OpClass::Neither: return "neither";
  }
  return "?";
}

OpClass classify_operator(std::string_view token) {
  static const std::set<std::string_view> logical = {"<", "<=", ">", ">=", "==", "!=", "&&", "||", "!"};
  static const std::set<std::string_view> arith = {"+",  "-",  "*",  "/",  "%",  "++",
                                                    "--", "+=", "-=", "*=", "/=", "%="};
  static const std::set<std::string_view> branch = {"if", "?:", "?"};
  static const std::set<std::string_view> neither = {"=", ",", "[]", "["};
  if (logical.count(token)) return OpClass::Logical;
  if (arith.count(token)) return OpClass::Arith;
  if (branch.count(token)) return OpClass::Branch;
  if (neither.count(token)) return OpClass::Neither;
  throw std::invalid_argument("unknown operator '" + std::string(token) + "'");
}

std::optional<long long> int_constant(const Expr& e) {
  if (e.kind == ExprKind::IntLiteral) {
    long long v = 0;
    const bool hex = e.text.size() > 2 && (e.text[1] == 'x' || e.text[1] == 'X');
    const char* first = e.text.data() + (hex ? 2 : 0);
    const char* last = e.text.data() + e.text.size();
    auto [ptr, ec] = std::from_chars(first, last, v, hex ? 16 : 10);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    return v;
  }
  if (e.kind == ExprKind::Unary && (e.text == "-" || e.text == "+")) {
    auto inner = int_constant(*e.args[0]);
    if (!inner) return std::nullopt;
    return e.text == "-" ? -*inner : *inner;
  }
  return std::nullopt;
}

namespace {

bool is_name(const Expr& e, const std::string& name) {
  return e.kind == ExprKind::Name && e.text == name;
}

struct Header {
  std::optional<std::string> var;
  std::optional<long long> start;
};

Header read_init(const Stmt& for_stmt) {
  Header h;
  if (!for_stmt.init) return h;
  const Stmt& init = *for_stmt.init;
  if (init.kind == StmtKind::Decl && init.decls.size() == 1 && init.decls[0].init) {
    h.var = init.decls[0].name;
    h.start = int_constant(*init.decls[0].init);
  } else if (init.kind == StmtKind::Expr && init.exprs.size() == 1) {
    const Expr& e = *init.exprs[0];
    if (e.kind == ExprKind::Assign && e.text == "=" && e.args[0]->kind == ExprKind::Name) {
      h.var = e.args[0]->text;
      h.start = int_constant(*e.args[1]);
    }
  }
  return h;
}

// Signed stride of a step list, if it is a literal increment of `var`.
std::optional<long long> read_stride(const Stmt& for_stmt, const std::string& var) {
  if (for_stmt.step.size() != 1) return std::nullopt;
  const Expr& e = *for_stmt.step[0];
  if ((e.kind == ExprKind::Postfix || e.kind == ExprKind::Unary) && is_name(*e.args[0], var)) {
    if (e.text == "++") return 1;
    if (e.text == "--") return -1;
    return std::nullopt;
  }
  if (e.kind != ExprKind::Assign || !is_name(*e.args[0], var)) return std::nullopt;
  if (e.text == "+=" || e.text == "-=") {
    auto s = int_constant(*e.args[1]);
    if (!s) return std::nullopt;
    return e.text == "+=" ? *s : -*s;
  }
  if (e.text == "=") {
    const Expr& rhs = *e.args[1];
    if (rhs.kind != ExprKind::Binary || (rhs.text != "+" && rhs.text != "-")) return std::nullopt;
    if (is_name(*rhs.args[0], var)) {
      auto s = int_constant(*rhs.args[1]);
      if (!s) return std::nullopt;
      return rhs.text == "+" ? *s : -*s;
    }
    if (rhs.text == "+" && is_name(*rhs.args[1], var)) return int_constant(*rhs.args[0]);
  }
  return std::nullopt;
}

long long ceil_div(long long num, long long den) { return (num + den - 1) / den; }

} // namespace

std::optional<std::string> induction_variable(const Stmt& for_stmt) {
  if (auto h = read_init(for_stmt); h.var) return h.var;
  if (for_stmt.cond && for_stmt.cond->kind == ExprKind::Binary &&
      for_stmt.cond->args[0]->kind == ExprKind::Name)
    return for_stmt.cond->args[0]->text;
  return std::nullopt;
}

TripCount derive_trip_count(const Stmt& for_stmt) {
  const Header h = read_init(for_stmt);
  if (!h.var || !h.start || !for_stmt.cond) return TripCount::symbolic();
  const Expr& cond = *for_stmt.cond;
  if (cond.kind != ExprKind::Binary || !is_name(*cond.args[0], *h.var)) return TripCount::symbolic();
  const auto bound = int_constant(*cond.args[1]);
  const auto stride = read_stride(for_stmt, *h.var);
  if (!bound || !stride || *stride == 0) return TripCount::symbolic();
  const long long lo = *h.start;
  const long long hi = *bound;
  const long long s = *stride;
  long long n = 0;
  if (cond.text == "<" && s > 0) {
    n = hi > lo ? ceil_div(hi - lo, s) : 0;
  } else if (cond.text == "<=" && s > 0) {
    n = hi >= lo ? (hi - lo) / s + 1 : 0;
  } else if (cond.text == ">" && s < 0) {
    n = lo > hi ? ceil_div(lo - hi, -s) : 0;
  } else if (cond.text == ">=" && s < 0) {
    n = lo >= hi ? (lo - hi) / -s + 1 : 0;
  } else {
    return TripCount::symbolic();
  }
  return TripCount::known(static_cast<std::uint64_t>(n));
}

namespace {

// Accumulates counts over statement units. Within one unit, operator nodes
// with identical canonical text count once.
class Counter {
 public:
  explicit Counter(const std::set<std::string>& array_names) : array_names_(array_names) {}

  void unit(const std::vector<const Expr*>& roots) {
    std::set<std::pair<OpClass, std::string>> seen;
    for (const Expr* root : roots) collect(*root, seen);
    for (const auto& [cls, text] : seen) {
      switch (cls) {
        case OpClass::Logical: ++logical_; break;
        case OpClass::Arith: ++arith_; break;
        case OpClass::Branch: ++branches_; break;
        case OpClass::Neither: break;
      }
    }
  }

  void branch_construct() { ++branches_; }
  void use_name(const std::string& name) {
    (array_names_.count(name) ? arrays_ : scalars_).insert(name);
  }

  OpCounts finish(const std::vector<std::string>& excluded_scalars) const {
    auto scalars = scalars_;
    for (const auto& v : excluded_scalars) scalars.erase(v);
    return {logical_, arith_, branches_, static_cast<int>(arrays_.size()),
            static_cast<int>(scalars.size())};
  }

 private:
  void collect(const Expr& e, std::set<std::pair<OpClass, std::string>>& seen) {
    switch (e.kind) {
      case ExprKind::Name: use_name(e.text); break;
      case ExprKind::Subscript: arrays_.insert(e.text); break;
      case ExprKind::Unary:
      case ExprKind::Postfix:
      case ExprKind::Binary:
      case ExprKind::Assign:
      case ExprKind::Ternary: {
        const OpClass cls = classify_operator(e.text);
        if (cls != OpClass::Neither) seen.emplace(cls, print_expr(e));
        break;
      }
      default: break;
    }
    for (const auto& arg : e.args) collect(*arg, seen);
  }

  const std::set<std::string>& array_names_;
  int logical_ = 0;
  int arith_ = 0;
  int branches_ = 0;
  std::set<std::string> arrays_;
  std::set<std::string> scalars_;
};

struct LoopShape {
  TripCount trip;
  std::vector<LoopShape> inner;
};

class Analyzer {
 public:
  explicit Analyzer(FunctionUnit& fn) : fn_(fn) {
    for (const auto& p : fn.params)
      if (!p.dims.empty()) array_names_.insert(p.name);
    collect_array_decls(*fn.body);
  }

  void run() {
    Counter nonloop(array_names_);
    walk_outside(*fn_.body, nonloop);
    fn_.nonloop_counts = nonloop.finish({});
  }

 private:
  void collect_array_decls(const Stmt& s) {
    if (s.kind == StmtKind::Decl)
      for (const auto& d : s.decls)
        if (!d.dims.empty()) array_names_.insert(d.name);
    for (const auto& c : s.children) collect_array_decls(*c);
    if (s.then_branch) collect_array_decls(*s.then_branch);
    if (s.else_branch) collect_array_decls(*s.else_branch);
    if (s.body) collect_array_decls(*s.body);
  }

  // Statement-level accounting shared by loop and non-loop code. `on_loop`
  // decides what happens when a for statement is reached.
  template <typename OnLoop>
  void walk(const Stmt& s, Counter& counter, OnLoop&& on_loop) {
    switch (s.kind) {
      case StmtKind::Empty: break;
      case StmtKind::Expr:
      case StmtKind::Return: {
        std::vector<const Expr*> roots;
        for (const auto& e : s.exprs) roots.push_back(e.get());
        if (!roots.empty()) counter.unit(roots);
        break;
      }
      case StmtKind::Decl: {
        std::vector<const Expr*> roots;
        for (const auto& d : s.decls) {
          if (!d.init) continue;
          counter.use_name(d.name);
          roots.push_back(d.init.get());
        }
        if (!roots.empty()) counter.unit(roots);
        break;
      }
      case StmtKind::Block:
        for (const auto& c : s.children) walk(*c, counter, on_loop);
        break;
      case StmtKind::If:
        counter.branch_construct();
        counter.unit({s.cond.get()});
        walk(*s.then_branch, counter, on_loop);
        if (s.else_branch) walk(*s.else_branch, counter, on_loop);
        break;
      case StmtKind::For: on_loop(s); break;
    }
  }

  void walk_outside(const Stmt& s, Counter& counter) {
    walk(s, counter, [this](const Stmt& loop) { fn_.loop_nests.push_back(build_nest(loop)); });
  }

  LoopNest build_nest(const Stmt& root) {
    Counter counter(array_names_);
    std::vector<std::string> vars;
    LoopShape shape = walk_loop(root, counter, vars);
    LoopNest nest;
    nest.loc = root.loc;
    nest.loop_vars = vars;
    nest.body_counts = counter.finish(vars);
    // Trip counts follow the first deepest path in textual order.
    const LoopShape* node = &shape;
    while (true) {
      nest.trip_counts.push_back(node->trip);
      const LoopShape* deepest = nullptr;
      int best = 0;
      for (const auto& child : node->inner) {
        const int d = depth_of(child);
        if (d > best) {
          best = d;
          deepest = &child;
        }
      }
      if (!deepest) break;
      node = deepest;
    }
    nest.depth = static_cast<int>(nest.trip_counts.size());
    return nest;
  }

  static int depth_of(const LoopShape& shape) {
    int best = 0;
    for (const auto& c : shape.inner) best = std::max(best, depth_of(c));
    return best + 1;
  }

  LoopShape walk_loop(const Stmt& loop, Counter& counter, std::vector<std::string>& vars) {
    LoopShape shape;
    shape.trip = derive_trip_count(loop);
    if (auto v = induction_variable(loop)) {
      if (std::find(vars.begin(), vars.end(), *v) == vars.end()) vars.push_back(*v);
    }
    walk(*loop.body, counter, [&](const Stmt& inner) {
      shape.inner.push_back(walk_loop(inner, counter, vars));
    });
    return shape;
  }

  FunctionUnit& fn_;
  std::set<std::string> array_names_;
};

} // namespace

void analyze(FunctionUnit& fn) {
  fn.loop_nests.clear();
  fn.nonloop_counts = {};
  Analyzer(fn).run();
}

} // namespace agile::parser
