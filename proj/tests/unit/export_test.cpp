#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "agile/common/json_io.hpp"
#include "agile/forest/export.hpp"
#include "agile/parser/evaluator.hpp"
#include "agile/parser/parser.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace agile::forest {
namespace {

using parser::ArrayValue;
using parser::Argument;
using parser::ScalarType;
using parser::Value;

RandomForest trained(int n_trees, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const features::FeatureSchema schema(2);
  auto rows = test::random_rows(rng, 200, schema.width(), 7);
  for (auto& r : rows) r.label = r.features[5] + 0.5 * r.features[1] < 2.2 ? Label::Easy : Label::Hard;
  ForestParams p;
  p.n_trees = n_trees;
  p.rng_seed = seed;
  return train_forest(rows, schema, p, "feedface00000000");
}

struct Interpreted {
  Label label;
  int easy;
  int hard;
};

Interpreted interpret(const parser::FunctionUnit& fn, const std::vector<double>& x) {
  auto xs = std::make_shared<ArrayValue>(ScalarType::Double, std::vector<std::size_t>{x.size()});
  xs->data = x;
  auto votes = std::make_shared<ArrayValue>(ScalarType::Int, std::vector<std::size_t>{2});
  std::vector<Argument> args{xs, votes};
  const auto r = parser::Evaluator().call(fn, args);
  return {r && r->i == 1 ? Label::Easy : Label::Hard, static_cast<int>(votes->data[0]),
          static_cast<int>(votes->data[1])};
}

TEST(Export, SingleLeafTreeIsConstant) {
  RandomForest m;
  m.schema = features::FeatureSchema(1);
  DecisionTree t;
  TreeNode leaf;
  leaf.label = Label::Easy;
  leaf.class_counts = {3, 1};
  t.nodes.push_back(leaf);
  m.trees.push_back(t);
  m.params.n_trees = 1;
  const auto code = export_decision_code(m);
  EXPECT_EQ(code.find("if ("), std::string::npos);
  const auto fn = parser::parse_function(code);
  EXPECT_EQ(fn.name, kExportedFunctionName);
  for (double v : {-5.0, 0.0, 1e9}) {
    const auto r = interpret(fn, std::vector<double>(12, v));
    EXPECT_EQ(r.label, Label::Easy);
    EXPECT_EQ(r.easy, 1);
    EXPECT_EQ(r.hard, 0);
  }
}

TEST(Export, Deterministic) {
  EXPECT_EQ(export_decision_code(trained(5, 1)), export_decision_code(trained(5, 1)));
}

TEST(Export, InterpretedCodeAgreesWithPredict) {
  const auto model = trained(11, 2);
  const auto fn = parser::parse_function(export_decision_code(model));
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(-0.5, 3.5);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(model.schema.width());
    for (auto& v : x) v = u(rng);
    // Exact threshold hits exercise the <= routing.
    if (i % 4 == 0) {
      const auto& root = model.trees[static_cast<std::size_t>(i) % model.trees.size()].nodes[0];
      if (!root.leaf) x[root.feature] = root.threshold;
    }
    const auto want = predict_values(model, x);
    const auto got = interpret(fn, x);
    ASSERT_EQ(got.label, want.label) << i;
    ASSERT_EQ(got.easy, want.easy_votes) << i;
    ASSERT_EQ(got.hard, want.hard_votes) << i;
  }
}

TEST(Export, CompiledCodeAgreesWithPredict) {
  if (!test::compiler_available()) GTEST_SKIP() << "no C compiler";
  const auto model = trained(9, 3);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.5, 3.5);
  std::vector<std::vector<double>> xs(200, std::vector<double>(model.schema.width()));
  std::ostringstream prog;
  prog << "#include <stdio.h>\n" << export_decision_code(model) << "static double data[200][14] = {\n";
  for (auto& x : xs) {
    prog << "{";
    for (auto& v : x) {
      v = u(rng);
      prog << format_double(v) << ",";
    }
    prog << "},\n";
  }
  prog << "};\nint main(void) { int i; for (i = 0; i < 200; i++) { int votes[2];"
          " int easy = forest_classify(data[i], votes); printf(\"%d %d %d\\n\", easy, votes[0], votes[1]); }"
          " return 0; }\n";
  test::TempDir dir;
  test::write_text(dir / "e.c", prog.str());
  const std::string cmd = "cc -std=c99 -O1 -o " + (dir / "e").string() + " " + (dir / "e.c").string() + " && " +
                          (dir / "e").string() + " > " + (dir / "out.txt").string();
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  std::istringstream out(test::read_text(dir / "out.txt"));
  for (const auto& x : xs) {
    int easy = -1, e = -1, h = -1;
    out >> easy >> e >> h;
    const auto want = predict_values(model, x);
    EXPECT_EQ(easy == 1, want.label == Label::Easy);
    EXPECT_EQ(e, want.easy_votes);
    EXPECT_EQ(h, want.hard_votes);
  }
}

} // namespace
} // namespace agile::forest
