#include "agile/parser/evaluator.hpp"

#include <cmath>
#include <limits>

#include "agile/parser/analysis.hpp"

namespace agile::parser {

namespace {

constexpr std::int64_t kIntMin = std::numeric_limits<std::int32_t>::min();
constexpr std::int64_t kIntMax = std::numeric_limits<std::int32_t>::max();

ScalarType common_type(ScalarType a, ScalarType b) {
  if (a == ScalarType::Double || b == ScalarType::Double) return ScalarType::Double;
  if (a == ScalarType::Float || b == ScalarType::Float) return ScalarType::Float;
  return ScalarType::Int;
}

Value checked_int(std::int64_t v) {
  if (v < kIntMin || v > kIntMax) throw EvalError("signed integer overflow");
  return Value::of_int(v);
}

Value make_real(ScalarType type, double v) {
  return type == ScalarType::Float ? Value::of_float(v) : Value::of_double(v);
}

} // namespace

Value Value::of_float(double v) {
  return {ScalarType::Float, 0, static_cast<double>(static_cast<float>(v))};
}

std::int64_t Value::as_int() const {
  if (type == ScalarType::Int) return i;
  if (!std::isfinite(f) || f < -9.2e18 || f > 9.2e18) throw EvalError("float to int conversion out of range");
  return static_cast<std::int64_t>(f);
}

Value Value::converted(ScalarType to) const {
  switch (to) {
    case ScalarType::Int: return Value::of_int(as_int());
    case ScalarType::Float: return Value::of_float(as_double());
    case ScalarType::Double: return Value::of_double(as_double());
    case ScalarType::Void: break;
  }
  throw EvalError("conversion to void");
}

ArrayValue::ArrayValue(ScalarType elem_type, std::vector<std::size_t> extents)
    : elem(elem_type), dims(std::move(extents)) {
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  data.assign(total, 0.0);
}

namespace {

struct Slot {
  ScalarType type;
  Value value;
};

struct Scope {
  std::map<std::string, Slot> scalars;
  std::map<std::string, std::shared_ptr<ArrayValue>> arrays;
};

class Machine {
 public:
  Machine(std::map<std::string, Value>& globals, EvalLimits limits)
      : globals_(globals), limits_(limits) {}

  std::optional<Value> run(const FunctionUnit& fn, std::vector<Argument>& args) {
    if (args.size() != fn.params.size())
      throw EvalError("function '" + fn.name + "' expects " + std::to_string(fn.params.size()) +
                      " arguments, got " + std::to_string(args.size()));
    scopes_.emplace_back();
    for (std::size_t i = 0; i < args.size(); ++i) {
      const Param& p = fn.params[i];
      if (p.dims.empty()) {
        const auto* v = std::get_if<Value>(&args[i]);
        if (!v) throw EvalError("parameter '" + p.name + "' expects a scalar");
        scopes_.back().scalars[p.name] = {p.elem, v->converted(p.elem)};
      } else {
        const auto* a = std::get_if<std::shared_ptr<ArrayValue>>(&args[i]);
        if (!a || !*a) throw EvalError("parameter '" + p.name + "' expects an array");
        if ((*a)->dims.size() != p.dims.size())
          throw EvalError("parameter '" + p.name + "' has rank " + std::to_string(p.dims.size()));
        if ((*a)->elem != p.elem && ((*a)->elem == ScalarType::Int || p.elem == ScalarType::Int))
          throw EvalError("parameter '" + p.name + "' element type mismatch");
        scopes_.back().arrays[p.name] = *a;
      }
    }
    exec(*fn.body);
    if (fn.return_type == ScalarType::Void) return std::nullopt;
    if (!returned_) throw EvalError("function '" + fn.name + "' ended without returning a value");
    return returned_->converted(fn.return_type);
  }

 private:
  void tick() {
    if (++steps_ > limits_.max_steps) throw EvalError("step limit exceeded");
  }

  Slot* find_scalar(const std::string& name) {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto found = it->scalars.find(name);
      if (found != it->scalars.end()) return &found->second;
    }
    return nullptr;
  }

  ArrayValue* find_array(const std::string& name) {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto found = it->arrays.find(name);
      if (found != it->arrays.end()) return found->second.get();
    }
    return nullptr;
  }

  // Static type of an expression, used for the ternary's result conversion.
  ScalarType type_of(const Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLiteral: return ScalarType::Int;
      case ExprKind::FloatLiteral:
        return e.text.back() == 'f' || e.text.back() == 'F' ? ScalarType::Float : ScalarType::Double;
      case ExprKind::Name: {
        if (auto* s = find_scalar(e.text)) return s->type;
        if (auto g = globals_.find(e.text); g != globals_.end()) return g->second.type;
        throw EvalError("unbound identifier '" + e.text + "'");
      }
      case ExprKind::Subscript: return array(e.text).elem;
      case ExprKind::Unary:
        return e.text == "!" ? ScalarType::Int : type_of(*e.args[0]);
      case ExprKind::Postfix: return type_of(*e.args[0]);
      case ExprKind::Binary: {
        const OpClass cls = classify_operator(e.text);
        if (cls == OpClass::Logical) return ScalarType::Int;
        return common_type(type_of(*e.args[0]), type_of(*e.args[1]));
      }
      case ExprKind::Assign: return type_of(*e.args[0]);
      case ExprKind::Ternary: return common_type(type_of(*e.args[1]), type_of(*e.args[2]));
    }
    return ScalarType::Int;
  }

  ArrayValue& array(const std::string& name) {
    if (auto* a = find_array(name)) return *a;
    throw EvalError("unknown array '" + name + "'");
  }

  std::size_t flat_index(const Expr& subscript) {
    ArrayValue& arr = array(subscript.text);
    if (subscript.args.size() != arr.dims.size())
      throw EvalError("array '" + subscript.text + "' indexed with wrong rank");
    std::size_t flat = 0;
    for (std::size_t k = 0; k < subscript.args.size(); ++k) {
      const Value idx = eval(*subscript.args[k]);
      if (idx.type != ScalarType::Int) throw EvalError("array subscript is not an integer");
      if (idx.i < 0 || static_cast<std::uint64_t>(idx.i) >= arr.dims[k])
        throw EvalError("index " + std::to_string(idx.i) + " out of bounds for '" +
                        subscript.text + "'");
      flat = flat * arr.dims[k] + static_cast<std::size_t>(idx.i);
    }
    return flat;
  }

  Value load(const Expr& target) {
    if (target.kind == ExprKind::Subscript) {
      ArrayValue& arr = array(target.text);
      const double raw = arr.data[flat_index(target)];
      if (arr.elem == ScalarType::Int) return Value::of_int(static_cast<std::int64_t>(raw));
      return make_real(arr.elem, raw);
    }
    if (auto* s = find_scalar(target.text)) return s->value;
    if (auto g = globals_.find(target.text); g != globals_.end()) return g->second;
    throw EvalError("unbound identifier '" + target.text + "'");
  }

  Value store(const Expr& target, const Value& v) {
    if (target.kind == ExprKind::Subscript) {
      ArrayValue& arr = array(target.text);
      const std::size_t at = flat_index(target);
      const Value stored = v.converted(arr.elem);
      arr.data[at] = stored.as_double();
      return stored;
    }
    if (auto* s = find_scalar(target.text)) {
      s->value = v.converted(s->type);
      return s->value;
    }
    if (auto g = globals_.find(target.text); g != globals_.end()) {
      g->second = v.converted(g->second.type);
      return g->second;
    }
    throw EvalError("assignment to undeclared identifier '" + target.text + "'");
  }

  Value arith(const std::string& op, const Value& a, const Value& b) {
    const ScalarType t = common_type(a.type, b.type);
    if (t == ScalarType::Int) {
      const std::int64_t x = a.i;
      const std::int64_t y = b.i;
      if (op == "+") return checked_int(x + y);
      if (op == "-") return checked_int(x - y);
      if (op == "*") return checked_int(x * y);
      if (y == 0) throw EvalError("integer division by zero");
      if (op == "/") return checked_int(x / y);
      if (op == "%") return checked_int(x % y);
    } else {
      const double x = a.as_double();
      const double y = b.as_double();
      if (op == "+") return make_real(t, x + y);
      if (op == "-") return make_real(t, x - y);
      if (op == "*") return make_real(t, x * y);
      if (op == "/") return make_real(t, x / y);
      if (op == "%") throw EvalError("'%' applied to a floating-point operand");
    }
    throw EvalError("unknown arithmetic operator '" + op + "'");
  }

  Value compare(const std::string& op, const Value& a, const Value& b) {
    const ScalarType t = common_type(a.type, b.type);
    bool r = false;
    if (t == ScalarType::Int) {
      const auto x = a.i, y = b.i;
      r = op == "<" ? x < y : op == "<=" ? x <= y : op == ">" ? x > y : op == ">=" ? x >= y
        : op == "==" ? x == y : x != y;
    } else {
      const double x = a.as_double(), y = b.as_double();
      r = op == "<" ? x < y : op == "<=" ? x <= y : op == ">" ? x > y : op == ">=" ? x >= y
        : op == "==" ? x == y : x != y;
    }
    return Value::of_int(r ? 1 : 0);
  }

  Value eval(const Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLiteral: return Value::of_int(*int_constant(e));
      case ExprKind::FloatLiteral: {
        const bool single = e.text.back() == 'f' || e.text.back() == 'F';
        const std::string digits = single ? e.text.substr(0, e.text.size() - 1) : e.text;
        const double v = std::strtod(digits.c_str(), nullptr);
        return single ? Value::of_float(v) : Value::of_double(v);
      }
      case ExprKind::Name:
      case ExprKind::Subscript: return load(e);
      case ExprKind::Unary: {
        if (e.text == "++" || e.text == "--")
          return store(*e.args[0], arith(e.text == "++" ? "+" : "-", load(*e.args[0]), Value::of_int(1)));
        const Value v = eval(*e.args[0]);
        if (e.text == "!") return Value::of_int(v.truthy() ? 0 : 1);
        if (e.text == "+") return v;
        if (v.type == ScalarType::Int) return checked_int(-v.i);
        return make_real(v.type, -v.f);
      }
      case ExprKind::Postfix: {
        const Value old = load(*e.args[0]);
        store(*e.args[0], arith(e.text == "++" ? "+" : "-", old, Value::of_int(1)));
        return old;
      }
      case ExprKind::Binary: {
        if (e.text == "&&") {
          if (!eval(*e.args[0]).truthy()) return Value::of_int(0);
          return Value::of_int(eval(*e.args[1]).truthy() ? 1 : 0);
        }
        if (e.text == "||") {
          if (eval(*e.args[0]).truthy()) return Value::of_int(1);
          return Value::of_int(eval(*e.args[1]).truthy() ? 1 : 0);
        }
        const Value a = eval(*e.args[0]);
        const Value b = eval(*e.args[1]);
        if (classify_operator(e.text) == OpClass::Logical) return compare(e.text, a, b);
        return arith(e.text, a, b);
      }
      case ExprKind::Assign: {
        const Value rhs = eval(*e.args[1]);
        if (e.text == "=") return store(*e.args[0], rhs);
        const std::string op = e.text.substr(0, 1);
        return store(*e.args[0], arith(op, load(*e.args[0]), rhs));
      }
      case ExprKind::Ternary: {
        const ScalarType t = type_of(e);
        const Value chosen = eval(*e.args[0]).truthy() ? eval(*e.args[1]) : eval(*e.args[2]);
        return chosen.converted(t);
      }
    }
    throw EvalError("unsupported expression");
  }

  std::size_t extent(const Expr& dim) {
    const Value v = dim.kind == ExprKind::Name ? load(dim) : eval(dim);
    if (v.type != ScalarType::Int || v.i <= 0) throw EvalError("invalid array extent");
    return static_cast<std::size_t>(v.i);
  }

  void declare(const Stmt& s) {
    for (const auto& d : s.decls) {
      if (!d.dims.empty()) {
        std::vector<std::size_t> dims;
        for (const auto& dim : d.dims) dims.push_back(extent(*dim));
        scopes_.back().arrays[d.name] = std::make_shared<ArrayValue>(s.decl_type, dims);
        continue;
      }
      Value init = Value::of_int(0).converted(s.decl_type);
      if (d.init) init = eval(*d.init).converted(s.decl_type);
      scopes_.back().scalars[d.name] = {s.decl_type, init};
    }
  }

  void exec(const Stmt& s) {
    if (returned_) return;
    tick();
    switch (s.kind) {
      case StmtKind::Empty: return;
      case StmtKind::Expr:
        for (const auto& e : s.exprs) eval(*e);
        return;
      case StmtKind::Decl: declare(s); return;
      case StmtKind::Return:
        returned_ = s.exprs.empty() ? Value::of_int(0) : eval(*s.exprs[0]);
        return;
      case StmtKind::Block:
        scopes_.emplace_back();
        for (const auto& c : s.children) {
          exec(*c);
          if (returned_) break;
        }
        scopes_.pop_back();
        return;
      case StmtKind::If:
        if (eval(*s.cond).truthy()) {
          exec(*s.then_branch);
        } else if (s.else_branch) {
          exec(*s.else_branch);
        }
        return;
      case StmtKind::For:
        scopes_.emplace_back();
        if (s.init) exec(*s.init);
        while (!returned_ && eval(*s.cond).truthy()) {
          tick();
          exec(*s.body);
          if (returned_) break;
          for (const auto& e : s.step) eval(*e);
        }
        scopes_.pop_back();
        return;
    }
  }

  std::map<std::string, Value>& globals_;
  EvalLimits limits_;
  std::vector<Scope> scopes_;
  std::optional<Value> returned_;
  std::uint64_t steps_ = 0;
};

} // namespace

std::optional<Value> Evaluator::call(const FunctionUnit& fn, std::vector<Argument>& args,
                                     std::map<std::string, Value>& globals) const {
  Machine machine(globals, limits_);
  return machine.run(fn, args);
}

} // namespace agile::parser
