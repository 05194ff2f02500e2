#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "agile/parser/ast.hpp"

namespace agile::parser {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A typed scalar following C's usual arithmetic conversions: Int is 64-bit,
/// Float values are rounded to single precision after every operation.
struct Value {
  ScalarType type = ScalarType::Int;
  std::int64_t i = 0;
  double f = 0.0;

  static Value of_int(std::int64_t v) { return {ScalarType::Int, v, 0.0}; }
  static Value of_float(double v);
  static Value of_double(double v) { return {ScalarType::Double, 0, v}; }

  double as_double() const { return type == ScalarType::Int ? static_cast<double>(i) : f; }
  std::int64_t as_int() const;
  bool truthy() const { return type == ScalarType::Int ? i != 0 : f != 0.0; }
  Value converted(ScalarType to) const;
};

/// Row-major array storage shared between caller and evaluator so that
/// writes are visible after the call.
struct ArrayValue {
  ScalarType elem = ScalarType::Float;
  std::vector<std::size_t> dims;
  std::vector<double> data;

  ArrayValue(ScalarType elem, std::vector<std::size_t> dims);
};

using Argument = std::variant<Value, std::shared_ptr<ArrayValue>>;

struct EvalLimits {
  std::uint64_t max_steps = 100'000'000;
};

/// Tree-walking interpreter for the supported grammar. `globals` binds free
/// identifiers (symbolic constants or file-scope scalars); assignments to
/// them are written back.
class Evaluator {
 public:
  explicit Evaluator(EvalLimits limits = {}) : limits_(limits) {}

  std::optional<Value> call(const FunctionUnit& fn, std::vector<Argument>& args,
                            std::map<std::string, Value>& globals) const;
  std::optional<Value> call(const FunctionUnit& fn, std::vector<Argument>& args) const {
    std::map<std::string, Value> none;
    return call(fn, args, none);
  }

 private:
  EvalLimits limits_;
};

} // namespace agile::parser
