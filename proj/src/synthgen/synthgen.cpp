#include "agile/synthgen/synthgen.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <stdexcept>

#include "agile/common/hash.hpp"
#include "agile/common/rng.hpp"

namespace agile::synthgen {

namespace {

void check_range(const Range& r, const char* name, int floor) {
  if (r.min < floor) throw std::invalid_argument(std::string("gen config: ") + name + " minimum must be >= " + std::to_string(floor));
  if (r.max < r.min) throw std::invalid_argument(std::string("gen config: ") + name + " is empty");
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string("gen config: ") + name + " must be in [0, 1]");
}

bool is_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

Json range_json(const Range& r) { return Json::array({r.min, r.max}); }

Range range_from(const Json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
    throw std::invalid_argument("gen config: " + key + " must be [min, max] integers");
  return {v[0].get<int>(), v[1].get<int>()};
}

} // namespace

void GenConfig::validate() const {
  if (n_functions < 1) throw std::invalid_argument("gen config: n_functions must be positive");
  check_range(depth_range, "depth_range", 1);
  check_range(niter_range, "niter_range", 1);
  check_range(ops_range, "ops_range", 0);
  check_range(n_arrays_range, "n_arrays_range", 1);
  check_range(n_scalars_range, "n_scalars_range", 0);
  check_range(nests_range, "nests_range", 0);
  check_range(nonloop_range, "nonloop_range", 0);
  check_probability(p_symbolic, "p_symbolic");
  check_probability(p_branch, "p_branch");
  if (ops_range.max == 0 && p_branch > 0.0)
    throw std::invalid_argument("gen config: p_branch > 0 needs statements, but ops_range max is 0");
  if (!is_identifier(name_prefix)) throw std::invalid_argument("gen config: name_prefix must be an identifier");
}

Json GenConfig::to_json() const {
  Json j = Json::object();
  j["seed"] = seed;
  j["n_functions"] = n_functions;
  j["depth_range"] = range_json(depth_range);
  j["niter_range"] = range_json(niter_range);
  j["p_symbolic"] = p_symbolic;
  j["ops_range"] = range_json(ops_range);
  j["p_branch"] = p_branch;
  j["n_arrays_range"] = range_json(n_arrays_range);
  j["n_scalars_range"] = range_json(n_scalars_range);
  j["nests_range"] = range_json(nests_range);
  j["nonloop_range"] = range_json(nonloop_range);
  j["name_prefix"] = name_prefix;
  return j;
}

GenConfig GenConfig::from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("gen config must be a JSON object");
  GenConfig cfg;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const Json& v = it.value();
    try {
      if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "n_functions") cfg.n_functions = v.get<int>();
      else if (key == "depth_range") cfg.depth_range = range_from(v, key);
      else if (key == "niter_range") cfg.niter_range = range_from(v, key);
      else if (key == "p_symbolic") cfg.p_symbolic = v.get<double>();
      else if (key == "ops_range") cfg.ops_range = range_from(v, key);
      else if (key == "p_branch") cfg.p_branch = v.get<double>();
      else if (key == "n_arrays_range") cfg.n_arrays_range = range_from(v, key);
      else if (key == "n_scalars_range") cfg.n_scalars_range = range_from(v, key);
      else if (key == "nests_range") cfg.nests_range = range_from(v, key);
      else if (key == "nonloop_range") cfg.nonloop_range = range_from(v, key);
      else if (key == "name_prefix") cfg.name_prefix = v.get<std::string>();
      else throw std::invalid_argument("gen config: unknown key '" + key + "'");
    } catch (const Json::type_error&) {
      throw std::invalid_argument("gen config: wrong type for '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

std::string GenConfig::hash() const { return fingerprint(canonical_dump(to_json())); }

namespace {

constexpr const char* kLiterals[] = {"0.5f", "0.25f", "1.5f", "2.0f", "3.0f"};
constexpr const char* kOps[] = {"+", "-", "*", "/"};

struct Array {
  std::string name;
  int rank;
};

// Builds one function as text. Every subscript is a loop variable in scope or
// 0, and every loop runs from 0 to at most N, so all accesses stay inside
// arrays of extent N.
class FunctionBuilder {
 public:
  FunctionBuilder(const GenConfig& cfg, Rng& rng) : cfg_(cfg), rng_(rng) {}

  std::string build(const std::string& name) {
    const int n_arrays = draw(cfg_.n_arrays_range);
    for (int a = 0; a < n_arrays; ++a)
      arrays_.push_back({"A" + std::to_string(a), bernoulli(rng_, 0.5) ? 2 : 1});
    n_scalars_ = draw(cfg_.n_scalars_range);

    std::string params;
    for (const auto& a : arrays_) {
      if (!params.empty()) params += ", ";
      params += "float " + a.name + (a.rank == 2 ? "[N][N]" : "[N]");
    }
    for (int s = 0; s < n_scalars_; ++s) params += ", float x" + std::to_string(s);

    std::vector<int> depths(static_cast<std::size_t>(draw(cfg_.nests_range)));
    for (auto& d : depths) d = draw(cfg_.depth_range);
    const int n_before = draw(cfg_.nonloop_range);

    std::string body;
    const int vars = depths.empty() ? 0 : *std::max_element(depths.begin(), depths.end());
    if (vars > 0) {
      body += "  int ";
      for (int v = 0; v < vars; ++v) body += (v ? ", i" : "i") + std::to_string(v);
      body += ";\n";
    }
    // Non-loop statements are split around the nests.
    int before = n_before > 0 ? static_cast<int>(uniform_between(rng_, 0, n_before)) : 0;
    for (int k = 0; k < before; ++k) body += "  " + statement() + "\n";
    for (int d : depths) body += nest(d, 0, 1);
    for (int k = before; k < n_before; ++k) body += "  " + statement() + "\n";
    return "void " + name + "(" + params + ") {\n" + body + "}\n";
  }

 private:
  int draw(const Range& r) { return static_cast<int>(uniform_between(rng_, r.min, r.max)); }

  std::string nest(int depth, int level, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string var = "i" + std::to_string(level);
    const std::string bound =
        bernoulli(rng_, cfg_.p_symbolic) ? "N" : std::to_string(draw(cfg_.niter_range));
    std::string out = pad + "for (" + var + " = 0; " + var + " < " + bound + "; " + var + "++) {\n";
    scope_.push_back(var);
    if (level + 1 < depth) {
      out += nest(depth, level + 1, indent + 1);
    } else {
      const int n = draw(cfg_.ops_range);
      for (int k = 0; k < n; ++k) out += pad + "  " + statement() + "\n";
    }
    scope_.pop_back();
    return out + pad + "}\n";
  }

  std::string index() {
    if (scope_.empty()) return "0";
    return scope_[uniform_below(rng_, scope_.size())];
  }

  std::string access(const Array& a) {
    std::string out = a.name + "[" + index() + "]";
    if (a.rank == 2) out += "[" + index() + "]";
    return out;
  }

  std::string leaf() {
    const auto pick = uniform_below(rng_, 5);
    if (pick < 3 || (pick == 3 && n_scalars_ == 0)) return access(arrays_[uniform_below(rng_, arrays_.size())]);
    if (pick == 3) return "x" + std::to_string(uniform_below(rng_, static_cast<std::uint64_t>(n_scalars_)));
    return kLiterals[uniform_below(rng_, std::size(kLiterals))];
  }

  std::string expr(int ops, bool nested) {
    if (ops == 0) return leaf();
    const int left_ops = static_cast<int>(uniform_between(rng_, 0, ops - 1));
    const std::string op = kOps[uniform_below(rng_, std::size(kOps))];
    const std::string lhs = expr(left_ops, true);
    const std::string rhs = expr(ops - 1 - left_ops, true);
    // Divisors are offset by one so fresh driver data (in [0, 1)) never divides by zero.
    std::string out = op == "/" ? lhs + " / (" + rhs + " + 1.0f)" : lhs + " " + op + " " + rhs;
    return nested ? "(" + out + ")" : out;
  }

  std::string statement() {
    const std::string target = access(arrays_[uniform_below(rng_, arrays_.size())]);
    const std::string assign = bernoulli(rng_, 0.25) ? " += " : " = ";
    if (bernoulli(rng_, cfg_.p_branch)) {
      const std::string cond = leaf() + (bernoulli(rng_, 0.5) ? " < " : " > ") + leaf();
      return target + assign + cond + " ? " + expr(static_cast<int>(uniform_between(rng_, 0, 1)), true) +
             " : " + expr(static_cast<int>(uniform_between(rng_, 0, 1)), true) + ";";
    }
    return target + assign + expr(static_cast<int>(uniform_between(rng_, 1, 3)), false) + ";";
  }

  const GenConfig& cfg_;
  Rng& rng_;
  std::vector<Array> arrays_;
  int n_scalars_ = 0;
  std::vector<std::string> scope_;
};

std::uint64_t function_seed(std::uint64_t seed, std::size_t index) {
  return seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(index) + 1));
}

} // namespace

std::vector<GeneratedFunction> generate(const GenConfig& cfg) {
  cfg.validate();
  std::vector<GeneratedFunction> out;
  const int digits = std::max(4, static_cast<int>(std::to_string(cfg.n_functions - 1).size()));
  for (int i = 0; i < cfg.n_functions; ++i) {
    std::string number = std::to_string(i);
    number.insert(0, static_cast<std::size_t>(digits) - number.size(), '0');
    const std::string name = cfg.name_prefix + "_" + number;
    const std::uint64_t seed = function_seed(cfg.seed, static_cast<std::size_t>(i));
    Rng rng(seed);
    FunctionBuilder builder(cfg, rng);
    out.push_back({name, seed, {name + ".c", builder.build(name)}});
  }
  return out;
}

Census feature_census(const std::vector<parser::SourceUnit>& corpus) {
  if (corpus.empty()) throw std::invalid_argument("feature_census: empty corpus");
  std::vector<parser::FunctionUnit> functions;
  for (const auto& src : corpus) {
    auto parsed = parser::parse_unit(src, true);
    for (auto& fn : parsed.functions) functions.push_back(std::move(fn));
  }
  if (functions.empty()) throw std::invalid_argument("feature_census: corpus defines no functions");
  Census census;
  census.schema = features::FeatureSchema(features::compute_max_depth(functions));
  census.rows = functions.size();
  const auto layout = census.schema.layout();
  census.slots.resize(layout.size());
  for (std::size_t s = 0; s < layout.size(); ++s) {
    census.slots[s].name = layout[s];
    census.slots[s].min = std::numeric_limits<double>::infinity();
    census.slots[s].max = -std::numeric_limits<double>::infinity();
  }
  for (const auto& fn : functions) {
    const auto v = features::extract(fn, census.schema);
    for (std::size_t s = 0; s < v.values.size(); ++s) {
      auto& slot = census.slots[s];
      slot.min = std::min(slot.min, v.values[s]);
      slot.max = std::max(slot.max, v.values[s]);
      slot.mean += v.values[s];
    }
  }
  for (auto& slot : census.slots) slot.mean /= static_cast<double>(census.rows);
  return census;
}

} // namespace agile::synthgen
