#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "agile/parser/evaluator.hpp"
#include "agile/parser/parser.hpp"
#include "test_support.hpp"

namespace agile::parser {
namespace {

std::int64_t call_int(const std::string& text, std::vector<Argument> args) {
  const auto fn = parse_function(text);
  const auto result = Evaluator().call(fn, args);
  EXPECT_TRUE(result.has_value());
  return result ? result->i : 0;
}

TEST(Evaluator, IntegerArithmeticTruncatesLikeC) {
  const std::string f = "int f(int a, int b) { return a / b * 100 + a % b; }";
  EXPECT_EQ(call_int(f, {Value::of_int(7), Value::of_int(2)}), 301);
  EXPECT_EQ(call_int(f, {Value::of_int(-7), Value::of_int(2)}), -301);
  EXPECT_EQ(call_int(f, {Value::of_int(7), Value::of_int(-2)}), -299);
}

TEST(Evaluator, LogicalOperatorsShortCircuit) {
  // The right operand would divide by zero.
  EXPECT_EQ(call_int("int f(int a) { return a == 0 || 10 / a > 1; }", {Value::of_int(0)}), 1);
  EXPECT_EQ(call_int("int f(int a) { return a != 0 && 10 / a > 1; }", {Value::of_int(0)}), 0);
}

TEST(Evaluator, FloatOperationsRoundToSinglePrecision) {
  const auto fn = parse_function("float f(float a, float b) { return a + b; }");
  std::vector<Argument> args{Value::of_float(0.1), Value::of_float(0.2)};
  const auto r = Evaluator().call(fn, args);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->type, ScalarType::Float);
  EXPECT_EQ(r->f, static_cast<double>(0.1f + 0.2f));
}

TEST(Evaluator, LoopsAndLocalScalars) {
  EXPECT_EQ(call_int("int f(int n) { int i, s = 0; for (i = 1; i <= n; i++) s += i * i; return s; }",
                     {Value::of_int(10)}),
            385);
}

TEST(Evaluator, FloydWarshallMatchesDirectComputation) {
  const auto fn = parse_function(test::read_text(test::data_path("floyd_warshall.c")));
  constexpr std::size_t n = 9;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<float> weight(0.0f, 10.0f);
  auto path = std::make_shared<ArrayValue>(ScalarType::Float, std::vector<std::size_t>{n, n});
  std::vector<float> expected(n * n);
  for (std::size_t i = 0; i < n * n; ++i) {
    expected[i] = weight(rng);
    path->data[i] = expected[i];
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const float through = expected[i * n + k] + expected[k * n + j];
        expected[i * n + j] = expected[i * n + j] < through ? expected[i * n + j] : through;
      }
  std::vector<Argument> args{Value::of_int(static_cast<std::int64_t>(n)), path};
  std::map<std::string, Value> globals{{"N", Value::of_int(static_cast<std::int64_t>(n))}};
  EXPECT_FALSE(Evaluator().call(fn, args, globals).has_value());
  for (std::size_t i = 0; i < n * n; ++i) EXPECT_EQ(path->data[i], static_cast<double>(expected[i])) << i;
}

TEST(Evaluator, GlobalsAreWrittenBack) {
  const auto fn = parse_function("void f(int n) { total = total + n; }");
  std::vector<Argument> args{Value::of_int(4)};
  std::map<std::string, Value> globals{{"total", Value::of_int(3)}};
  Evaluator().call(fn, args, globals);
  EXPECT_EQ(globals.at("total").i, 7);
}

TEST(Evaluator, RuntimeErrors) {
  const Evaluator ev;
  std::map<std::string, Value> globals;
  auto run = [&](const std::string& text, std::vector<Argument> args) {
    const auto fn = parse_function(text);
    ev.call(fn, args, globals);
  };
  auto arr = std::make_shared<ArrayValue>(ScalarType::Float, std::vector<std::size_t>{4});
  EXPECT_THROW(run("void f(float a[4]) { a[4] = 1; }", {arr}), EvalError);
  EXPECT_THROW(run("int f(int a) { return a / 0; }", {Value::of_int(1)}), EvalError);
  EXPECT_THROW(run("void f(int a) { a = b; }", {Value::of_int(1)}), EvalError);
  EXPECT_THROW(run("int f(int a) { a = 1; }", {Value::of_int(1)}), EvalError);
  EXPECT_THROW(run("void f(int a) { }", {}), EvalError);
  EXPECT_THROW(run("void f(float a[4]) { }", {Value::of_int(1)}), EvalError);
}

TEST(Evaluator, StepLimitStopsRunawayLoops) {
  const auto fn = parse_function("void f(int n) { int i; for (i = 0; i < 1; i = i) n = n + 1; }");
  std::vector<Argument> args{Value::of_int(0)};
  EXPECT_THROW(Evaluator({.max_steps = 10000}).call(fn, args), EvalError);
}

} // namespace
} // namespace agile::parser
