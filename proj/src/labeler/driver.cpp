#include "agile/labeler/driver.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include "agile/parser/analysis.hpp"
#include "agile/parser/printer.hpp"

namespace agile::labeler {

using parser::Expr;
using parser::ExprKind;
using parser::ScalarType;
using parser::Stmt;
using parser::StmtKind;

namespace {

// What the function does with each identifier it mentions.
struct Usage {
  std::set<std::string> locals;
  std::vector<std::string> names;          // first-use order
  std::map<std::string, int> subscripts;   // array name -> index count (-1 if inconsistent)
  std::set<std::string> assigned;
  std::set<std::string> int_context;       // loop variables, subscript indices, % operands
  long long largest_bound = 0;

  void mention(const std::string& name) {
    if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
  }

  void expr(const Expr& e, bool in_index = false) {
    switch (e.kind) {
      case ExprKind::Name:
        mention(e.text);
        if (in_index) int_context.insert(e.text);
        break;
      case ExprKind::Subscript: {
        mention(e.text);
        const int n = static_cast<int>(e.args.size());
        auto [it, fresh] = subscripts.emplace(e.text, n);
        if (!fresh && it->second != n) it->second = -1;
        for (const auto& index : e.args) expr(*index, true);
        return;
      }
      case ExprKind::Assign:
      case ExprKind::Unary:
      case ExprKind::Postfix:
        if ((e.kind == ExprKind::Assign || e.text == "++" || e.text == "--") &&
            e.args[0]->kind == ExprKind::Name)
          assigned.insert(e.args[0]->text);
        break;
      case ExprKind::Binary:
        if (e.text == "%")
          for (const auto& a : e.args)
            if (a->kind == ExprKind::Name) int_context.insert(a->text);
        break;
      default: break;
    }
    for (const auto& a : e.args) expr(*a, in_index);
  }

  void dims(const std::vector<parser::ExprPtr>& ds) {
    for (const auto& d : ds) expr(*d);
  }

  void stmt(const Stmt& s) {
    for (const auto& e : s.exprs) expr(*e);
    for (const auto& d : s.decls) {
      locals.insert(d.name);
      dims(d.dims);
      if (d.init) expr(*d.init);
    }
    for (const auto& c : s.children) stmt(*c);
    if (s.kind == StmtKind::For) {
      if (auto v = parser::induction_variable(s)) int_context.insert(*v);
      if (s.cond && s.cond->kind == ExprKind::Binary)
        if (auto b = parser::int_constant(*s.cond->args[1])) largest_bound = std::max(largest_bound, *b);
    }
    if (s.init) stmt(*s.init);
    if (s.cond) expr(*s.cond);
    for (const auto& e : s.step) expr(*e);
    if (s.then_branch) stmt(*s.then_branch);
    if (s.else_branch) stmt(*s.else_branch);
    if (s.body) stmt(*s.body);
  }
};

const char* c_type(ScalarType t) {
  switch (t) {
    case ScalarType::Int: return "int";
    case ScalarType::Float: return "float";
    case ScalarType::Double: return "double";
    case ScalarType::Void: return "void";
  }
  return "int";
}

bool starts_with_drv(const std::string& name) { return name.rfind("drv_", 0) == 0; }

// Storage dims for an array parameter; the outer extent gets slack so that
// small constant offsets in subscripts stay in bounds.
std::string storage_dims(const parser::Param& p, const std::set<std::string>& int_params, int extent) {
  std::string out;
  for (std::size_t i = 0; i < p.dims.size(); ++i) {
    const Expr& d = *p.dims[i];
    std::string text = d.kind == ExprKind::Name && int_params.count(d.text) ? std::to_string(extent)
                                                                            : parser::print_expr(d);
    out += '[' + text + (i == 0 ? " + 8" : "") + ']';
  }
  return out;
}

} // namespace

Driver synthesize_driver(const parser::FunctionUnit& fn, const LabelerConfig& cfg) {
  if (fn.name == "main" || starts_with_drv(fn.name))
    throw DriverError("function name '" + fn.name + "' clashes with the driver");
  if (!fn.body) throw DriverError("function '" + fn.name + "' has no body");

  Usage use;
  std::set<std::string> params;
  std::set<std::string> int_params;
  for (const auto& p : fn.params) {
    params.insert(p.name);
    if (p.dims.empty() && p.elem == ScalarType::Int) int_params.insert(p.name);
    use.dims(p.dims);
  }
  use.stmt(*fn.body);
  for (const auto& name : use.names)
    if (starts_with_drv(name)) throw DriverError("identifier '" + name + "' clashes with the driver");

  Driver driver;
  driver.extent = static_cast<int>(std::max<long long>(cfg.array_extent, use.largest_bound));
  const int extent = driver.extent;

  struct FreeArray {
    std::string name;
    int rank;
  };
  std::vector<FreeArray> free_arrays;
  std::vector<std::pair<std::string, bool>> free_scalars;  // name, is_int
  for (const auto& name : use.names) {
    if (params.count(name) || use.locals.count(name)) continue;
    if (auto it = use.subscripts.find(name); it != use.subscripts.end()) {
      if (it->second < 1) throw DriverError("free array '" + name + "' is indexed inconsistently");
      free_arrays.push_back({name, it->second});
      driver.globals.push_back(name);
    } else if (use.assigned.count(name)) {
      free_scalars.emplace_back(name, use.int_context.count(name) > 0);
      driver.globals.push_back(name);
    } else {
      driver.bound_symbols.push_back(name);
    }
  }

  std::ostringstream src;
  src << "/* driver for " << fn.name << " */\n";
  src << "#include <stdio.h>\n#include <stdint.h>\n#include <time.h>\n\n";
  for (const auto& sym : driver.bound_symbols) src << "enum { " << sym << " = " << extent << " };\n";
  for (const auto& [name, is_int] : free_scalars)
    src << "static " << (is_int ? "int " : "double ") << name << ";\n";
  for (const auto& a : free_arrays) {
    src << "static double " << a.name << "[" << extent << " + 8]";
    if (a.rank == 2) src << "[" << extent << "]";
    src << ";\n";
  }

  // Argument storage.
  std::vector<std::string> call_args;
  for (std::size_t k = 0; k < fn.params.size(); ++k) {
    const auto& p = fn.params[k];
    const std::string var = "drv_arg" + std::to_string(k);
    if (!p.dims.empty()) {
      src << "static " << c_type(p.elem) << " " << var << storage_dims(p, int_params, extent) << ";\n";
      call_args.push_back(var);
    } else if (p.elem == ScalarType::Int) {
      call_args.push_back(std::to_string(extent));
    } else {
      src << "static " << c_type(p.elem) << " " << var << ";\n";
      call_args.push_back(var);
    }
  }
  src << "\n" << parser::print_function(fn) << "\n";

  src << "static uint64_t drv_state = " << cfg.rng_seed << "ULL;\n"
      << "static uint64_t drv_next(void) {\n"
      << "  uint64_t z = (drv_state += 0x9e3779b97f4a7c15ULL);\n"
      << "  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;\n"
      << "  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;\n"
      << "  return z ^ (z >> 31);\n"
      << "}\n"
      << "static double drv_unit(void) { return (double)(drv_next() >> 11) * (1.0 / 9007199254740992.0); }\n"
      << "static double drv_now(void) {\n"
      << "  struct timespec ts;\n"
      << "  clock_gettime(CLOCK_MONOTONIC, &ts);\n"
      << "  return (double)ts.tv_sec + (double)ts.tv_nsec * 1e-9;\n"
      << "}\n"
      << "static __typeof__(&" << fn.name << ") volatile drv_fn = &" << fn.name << ";\n\n";

  // Flat views over every array the driver owns, filled and summed alike.
  struct Region {
    std::string var;
    const char* type;
  };
  std::vector<Region> regions;
  for (std::size_t k = 0; k < fn.params.size(); ++k)
    if (!fn.params[k].dims.empty()) regions.push_back({"drv_arg" + std::to_string(k), c_type(fn.params[k].elem)});
  for (const auto& a : free_arrays) regions.push_back({a.name, "double"});

  src << "static void drv_fill(void) {\n";
  for (const auto& r : regions) {
    const bool integral = std::string_view(r.type) == "int";
    src << "  { " << r.type << " *p = (" << r.type << " *)" << r.var << "; size_t n = sizeof " << r.var
        << " / sizeof *p; size_t i;\n"
        << "    for (i = 0; i < n; i++) p[i] = "
        << (integral ? std::string("(int)(drv_next() % 8)") : "(" + std::string(r.type) + ")drv_unit()")
        << "; }\n";
  }
  for (std::size_t k = 0; k < fn.params.size(); ++k) {
    const auto& p = fn.params[k];
    if (p.dims.empty() && p.elem != ScalarType::Int)
      src << "  drv_arg" << k << " = (" << c_type(p.elem) << ")(0.5 + drv_unit());\n";
  }
  src << "}\n\n";

  src << "static double drv_checksum(void) {\n  double s = 0.0;\n";
  for (const auto& r : regions)
    src << "  { const " << r.type << " *p = (const " << r.type << " *)" << r.var << "; size_t n = sizeof "
        << r.var << " / sizeof *p; size_t i;\n    for (i = 0; i < n; i++) s += (double)p[i]; }\n";
  for (const auto& [name, is_int] : free_scalars) src << "  s += (double)" << name << ";\n";
  src << "  return s;\n}\n\n";

  std::string call = "drv_fn(";
  for (std::size_t i = 0; i < call_args.size(); ++i) call += (i ? ", " : "") + call_args[i];
  call += ")";

  src << "int main(void) {\n"
      << "  double drv_ret = 0.0, drv_before;\n"
      << "  long long calls = 1, k;\n"
      << "  double elapsed;\n"
      << "  drv_fill();\n"
      << "  drv_before = drv_checksum();\n";
  if (fn.return_type == ScalarType::Void)
    src << "  " << call << ";\n";
  else
    src << "  drv_ret = (double)" << call << ";\n";
  src << "  printf(\"checksum %.17g\\n\", drv_checksum() - drv_before + drv_ret);\n"
      << "  for (;;) {\n"
      << "    double t0 = drv_now();\n"
      << "    for (k = 0; k < calls; k++) " << call << ";\n"
      << "    elapsed = drv_now() - t0;\n"
      << "    if (elapsed >= " << format_double(cfg.min_runtime_s) << " || calls >= (1LL << 40)) break;\n"
      << "    calls *= 2;\n"
      << "  }\n"
      << "  printf(\"calls %lld\\n\", calls);\n"
      << "  printf(\"time_per_call %.17g\\n\", elapsed / (double)calls);\n"
      << "  return 0;\n"
      << "}\n";
  driver.source = src.str();
  return driver;
}

DriverOutput parse_driver_output(const std::string& stdout_text) {
  DriverOutput out;
  bool have_checksum = false, have_calls = false, have_time = false;
  std::istringstream in(stdout_text);
  std::string key, value;
  while (in >> key >> value) {
    if (key == "checksum") {
      out.checksum = value;
      have_checksum = true;
    } else if (key == "calls") {
      auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out.calls);
      have_calls = ec == std::errc{} && p == value.data() + value.size();
    } else if (key == "time_per_call") {
      auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out.time_per_call);
      have_time = ec == std::errc{} && p == value.data() + value.size();
    }
  }
  if (!have_checksum || !have_calls || !have_time)
    throw RunError("driver output is incomplete: '" + stdout_text + "'");
  if (!(out.time_per_call > 0.0)) throw RunError("driver reported a nonpositive time per call");
  return out;
}

} // namespace agile::labeler
