#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "agile/forest/forest.hpp"
#include "agile/forest/metrics.hpp"
#include "agile/forest/model_io.hpp"
#include "agile/forest/split.hpp"
#include "oracles.hpp"

namespace agile::forest {
namespace {

constexpr Label E = Label::Easy;
constexpr Label H = Label::Hard;

std::vector<LabeledRow> rows_1d(const std::vector<double>& values, const std::vector<Label>& labels) {
  std::vector<LabeledRow> rows;
  for (std::size_t i = 0; i < values.size(); ++i) rows.push_back({{values[i]}, labels[i]});
  return rows;
}

std::vector<std::size_t> all_of(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

TEST(Gini, Examples) {
  EXPECT_DOUBLE_EQ(gini({2, 2}), 0.5);
  EXPECT_DOUBLE_EQ(gini({4, 0}), 0.0);
  EXPECT_DOUBLE_EQ(gini({3, 1}), 0.375);
  EXPECT_THROW(gini({0, 0}), std::invalid_argument);
}

TEST(BestSplit, MidpointOfSeparableFeature) {
  const auto rows = rows_1d({1, 2, 3, 4}, {E, E, H, H});
  const std::vector<std::size_t> f{0};
  const auto s = best_split(rows, all_of(4), f);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->feature, 0u);
  EXPECT_EQ(s->threshold, 2.5);
  EXPECT_DOUBLE_EQ(s->impurity_decrease, 0.5);
}

TEST(BestSplit, PureSampleHasNoSplit) {
  const auto rows = rows_1d({1, 2, 3, 4}, {E, E, E, E});
  const std::vector<std::size_t> f{0};
  EXPECT_FALSE(best_split(rows, all_of(4), f));
}

TEST(BestSplit, PicksTheSeparatingFeature) {
  // Feature 0 splits the rows 2/2 with mixed labels; feature 1 separates them.
  const std::vector<LabeledRow> rows{{{5, 1}, E}, {{5, 9}, H}, {{7, 9}, H}, {{7, 1}, E}};
  const std::vector<std::size_t> f{0, 1};
  const auto s = best_split(rows, all_of(4), f);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->feature, 1u);
  EXPECT_EQ(s->threshold, 5.0);
}

TEST(BestSplit, TiesGoToLowerFeatureThenLowerThreshold) {
  // Features 0 and 1 carry the same information.
  std::vector<LabeledRow> rows{{{1, 1}, E}, {{2, 2}, H}, {{3, 3}, E}, {{4, 4}, H}};
  const std::vector<std::size_t> f{1, 0};
  const auto s = best_split(rows, all_of(4), f);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->feature, 0u);
  // Thresholds 1.5 and 3.5 tie; the lower one wins.
  rows = rows_1d({1, 2, 3, 4}, {E, H, H, E});
  const std::vector<std::size_t> f0{0};
  const auto t = best_split(rows, all_of(4), f0);
  ASSERT_TRUE(t);
  EXPECT_EQ(t->threshold, 1.5);
}

TEST(BestSplit, MinSamplesLeafIsHonoured) {
  const auto rows = rows_1d({1, 2, 3, 4, 5, 6}, {E, H, H, H, H, H});
  const std::vector<std::size_t> f{0};
  EXPECT_EQ(best_split(rows, all_of(6), f, 1)->threshold, 1.5);
  const auto s = best_split(rows, all_of(6), f, 2);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->threshold, 2.5);
  EXPECT_FALSE(best_split(rows, all_of(6), f, 4));
}

TEST(BestSplit, RepeatedSampleIndicesCount) {
  const auto rows = rows_1d({1, 2, 3}, {E, H, H});
  const std::vector<std::size_t> f{0};
  const std::vector<std::size_t> sample{0, 0, 0, 1, 2};
  // Row 0 alone would be too small a leaf; three copies of it are not.
  EXPECT_FALSE(best_split(rows, all_of(3), f, 2));
  const auto s = best_split(rows, sample, f, 2);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->threshold, 1.5);
}

TEST(BestSplit, AdjacentDoublesKeepAThresholdBetweenThem) {
  const double a = 1.0;
  const double b = std::nextafter(a, 2.0);
  const auto rows = rows_1d({a, b}, {E, H});
  const std::vector<std::size_t> f{0};
  const auto s = best_split(rows, all_of(2), f);
  ASSERT_TRUE(s);
  EXPECT_LE(a, s->threshold);
  EXPECT_LT(s->threshold, b);
}

TEST(BestSplit, MatchesBruteForceOracle) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 19;
    const std::size_t width = 1 + rng() % 5;
    const auto rows = test::random_rows(rng, n, width, 2 + static_cast<int>(rng() % 6));
    std::vector<std::size_t> sample;
    for (std::size_t i = 0; i < n; ++i) sample.push_back(trial % 2 ? rng() % n : i);
    std::vector<std::size_t> features;
    for (std::size_t f = 0; f < width; ++f)
      if (rng() % 3 || features.empty()) features.push_back(f);
    const std::size_t min_leaf = 1 + rng() % 3;
    const auto got = best_split(rows, sample, features, min_leaf);
    const auto want = test::brute_force_split(rows, sample, features, min_leaf);
    ASSERT_EQ(got.has_value(), want.has_value()) << "trial " << trial;
    if (!got) continue;
    EXPECT_EQ(got->feature, want->feature) << "trial " << trial;
    EXPECT_EQ(got->threshold, want->threshold) << "trial " << trial;
    EXPECT_NEAR(got->impurity_decrease, want->decrease, 1e-12) << "trial " << trial;
  }
}

TEST(Majority, TiesGoToHard) {
  EXPECT_EQ(majority({3, 2}), E);
  EXPECT_EQ(majority({2, 2}), H);
  EXPECT_EQ(majority({0, 0}), H);
  EXPECT_EQ(majority({1, 4}), H);
}

TEST(Bootstrap, SizeAndRange) {
  Rng rng(9);
  EXPECT_EQ(draw_bootstrap(10, 1.0, rng).size(), 10u);
  EXPECT_EQ(draw_bootstrap(10, 0.44, rng).size(), 4u);
  EXPECT_EQ(draw_bootstrap(10, 0.01, rng).size(), 1u);
  for (auto i : draw_bootstrap(7, 1.0, rng)) EXPECT_LT(i, 7u);
  EXPECT_THROW(draw_bootstrap(0, 1.0, rng), std::invalid_argument);
}

ForestParams exhaustive_params(std::size_t width) {
  ForestParams p;
  p.min_samples_leaf = 1;
  p.features_per_split = static_cast<int>(width);
  return p;
}

TEST(GrowTree, SeparableRowsNeedOneSplit) {
  const auto rows = rows_1d({1, 2, 3, 4}, {E, E, H, H});
  Rng rng(1);
  const auto tree = grow_tree(rows, all_of(4), exhaustive_params(1), 1, rng);
  EXPECT_EQ(tree.depth(), 1);
  EXPECT_EQ(tree.nodes.size(), 3u);
  for (const auto& r : rows) EXPECT_EQ(tree.predict(r.features), r.label);
}

TEST(GrowTree, IdenticalFeaturesGiveOneLeaf) {
  const auto rows = rows_1d({3, 3, 3, 3}, {E, H, E, H});
  Rng rng(1);
  const auto tree = grow_tree(rows, all_of(4), exhaustive_params(1), 1, rng);
  ASSERT_EQ(tree.nodes.size(), 1u);
  EXPECT_TRUE(tree.nodes[0].leaf);
  EXPECT_EQ(tree.nodes[0].label, H);
  EXPECT_EQ(tree.nodes[0].class_counts, (ClassCounts{2, 2}));
  const auto skewed = rows_1d({3, 3, 3}, {E, H, E});
  const auto t2 = grow_tree(skewed, all_of(3), exhaustive_params(1), 1, rng);
  EXPECT_EQ(t2.nodes[0].label, E);
}

TEST(GrowTree, DepthLimitCapsTheTree) {
  // XOR-like labels need two levels.
  std::vector<LabeledRow> rows{{{0, 0}, E}, {{0, 1}, H}, {{1, 0}, H}, {{1, 1}, E}, {{0, 0}, E}, {{1, 1}, E}};
  auto p = exhaustive_params(2);
  p.max_tree_depth = 1;
  Rng rng(4);
  const auto tree = grow_tree(rows, all_of(rows.size()), p, 2, rng);
  EXPECT_LE(tree.nodes.size(), 3u);
  EXPECT_LE(tree.depth(), 1);
}

TEST(GrowTree, StructureAndLeafCountsAreConsistent) {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t width = 1 + gen() % 6;
    const auto rows = test::random_rows(gen, 10 + gen() % 60, width);
    ForestParams p;
    p.min_samples_leaf = 1 + static_cast<int>(gen() % 3);
    p.max_tree_depth = 1 + static_cast<int>(gen() % 8);
    p.features_per_split = 1 + static_cast<int>(gen() % width);
    Rng rng(gen());
    const auto sample = draw_bootstrap(rows.size(), 1.0, rng);
    const auto tree = grow_tree(rows, sample, p, width, rng);
    // Preorder: children come after their parent.
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      const auto& n = tree.nodes[i];
      if (n.leaf) continue;
      EXPECT_GT(n.left, i);
      EXPECT_GT(n.right, n.left);
      EXPECT_LT(n.right, tree.nodes.size());
    }
    EXPECT_LE(tree.depth(), p.max_tree_depth);
    std::vector<ClassCounts> routed(tree.nodes.size(), ClassCounts{0, 0});
    for (auto r : sample) ++routed[tree.leaf_index(rows[r].features)][class_index(rows[r].label)];
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      if (!tree.nodes[i].leaf) continue;
      EXPECT_EQ(tree.nodes[i].class_counts, routed[i]) << "leaf " << i;
      EXPECT_GE(routed[i][0] + routed[i][1], static_cast<std::uint64_t>(p.min_samples_leaf));
      EXPECT_EQ(tree.nodes[i].label, majority(routed[i]));
    }
  }
}

DecisionTree constant_tree(Label label) {
  DecisionTree t;
  TreeNode leaf;
  leaf.label = label;
  leaf.class_counts = label == E ? ClassCounts{1, 0} : ClassCounts{0, 1};
  t.nodes.push_back(leaf);
  return t;
}

RandomForest forest_of(std::vector<Label> votes) {
  RandomForest m;
  m.schema = features::FeatureSchema(1);
  for (auto v : votes) m.trees.push_back(constant_tree(v));
  m.params.n_trees = static_cast<int>(votes.size());
  return m;
}

TEST(Predict, MajorityVote) {
  const std::vector<double> x(12, 0.0);
  auto p = predict_values(forest_of({E, E, H}), x);
  EXPECT_EQ(p.label, E);
  EXPECT_EQ(p.easy_votes, 2);
  EXPECT_EQ(p.hard_votes, 1);
  p = predict_values(forest_of({E, H}), x);
  EXPECT_EQ(p.label, H);
  EXPECT_EQ(p.easy_votes + p.hard_votes, 2);
}

TEST(Predict, SchemaMismatchIsRejected) {
  const auto m = forest_of({E});
  EXPECT_THROW(predict_values(m, std::vector<double>(13, 0.0)), std::invalid_argument);
  features::FeatureVector v{features::FeatureSchema(2), std::vector<double>(14, 0.0)};
  EXPECT_THROW(predict(m, v), std::invalid_argument);
}

std::vector<LabeledRow> planted(std::mt19937_64& rng, std::size_t n, std::size_t width) {
  auto rows = test::random_rows(rng, n, width, 8);
  for (auto& r : rows) r.label = r.features[1] + r.features[2] <= 3.0 ? E : H;
  return rows;
}

TEST(TrainForest, VotesMatchIndependentRecount) {
  std::mt19937_64 rng(31);
  const features::FeatureSchema schema(2);
  const auto rows = planted(rng, 150, schema.width());
  ForestParams p;
  p.n_trees = 15;
  p.rng_seed = 5;
  const auto model = train_forest(rows, schema, p, "fp");
  EXPECT_EQ(model.trees.size(), 15u);
  EXPECT_EQ(model.params.features_per_split, 4);
  for (int i = 0; i < 300; ++i) {
    std::vector<double> x(schema.width());
    for (auto& v : x) v = std::uniform_real_distribution<double>(-1.0, 5.0)(rng);
    const auto got = predict_values(model, x);
    const auto want = test::recount_votes(model, x);
    EXPECT_EQ(got.easy_votes, want.easy);
    EXPECT_EQ(got.hard_votes, want.hard);
    EXPECT_EQ(got.label, want.label());
  }
}

TEST(TrainForest, DeterministicAcrossWorkerCounts) {
  std::mt19937_64 rng(8);
  const features::FeatureSchema schema(3);
  const auto rows = planted(rng, 120, schema.width());
  ForestParams p;
  p.n_trees = 12;
  p.bootstrap_fraction = 0.7;
  p.rng_seed = 99;
  const auto a = model_to_text(train_forest(rows, schema, p, "x", 1));
  EXPECT_EQ(a, model_to_text(train_forest(rows, schema, p, "x", 1)));
  EXPECT_EQ(a, model_to_text(train_forest(rows, schema, p, "x", 4)));
  EXPECT_EQ(a, model_to_text(train_forest(rows, schema, p, "x", 16)));
  p.rng_seed = 100;
  EXPECT_NE(a, model_to_text(train_forest(rows, schema, p, "x", 1)));
}

// Split choice depends only on the order of values, so a strictly increasing
// rescaling of every feature must give the same trees with moved thresholds.
TEST(TrainForest, MonotoneRescalingKeepsTreeStructure) {
  std::mt19937_64 rng(41);
  const features::FeatureSchema schema(1);
  const auto rows = planted(rng, 200, schema.width());
  auto rescale = [](double v) { return v * v * v + 4.0 * v - 7.0; };
  auto scaled = rows;
  for (auto& r : scaled)
    for (auto& v : r.features) v = rescale(v);
  ForestParams p;
  p.n_trees = 9;
  p.rng_seed = 3;
  const auto a = train_forest(rows, schema, p, "");
  const auto b = train_forest(scaled, schema, p, "");
  ASSERT_EQ(a.trees.size(), b.trees.size());
  for (std::size_t t = 0; t < a.trees.size(); ++t) {
    ASSERT_EQ(a.trees[t].nodes.size(), b.trees[t].nodes.size());
    for (std::size_t i = 0; i < a.trees[t].nodes.size(); ++i) {
      const auto& x = a.trees[t].nodes[i];
      const auto& y = b.trees[t].nodes[i];
      ASSERT_EQ(x.leaf, y.leaf);
      if (x.leaf) {
        EXPECT_EQ(x.class_counts, y.class_counts);
        EXPECT_EQ(x.label, y.label);
      } else {
        EXPECT_EQ(x.feature, y.feature);
        EXPECT_EQ(x.left, y.left);
        EXPECT_EQ(x.right, y.right);
      }
    }
  }
  // Every row in a tree's bootstrap sample takes the same path in both trees.
  for (std::size_t t = 0; t < a.trees.size(); ++t) {
    Rng stream(p.rng_seed ^ t);
    for (auto r : draw_bootstrap(rows.size(), p.bootstrap_fraction, stream))
      EXPECT_EQ(a.trees[t].leaf_index(rows[r].features), b.trees[t].leaf_index(scaled[r].features));
  }
}

TEST(TrainForest, RejectsBadParams) {
  const features::FeatureSchema schema(1);
  std::vector<LabeledRow> rows{{std::vector<double>(12, 0.0), E}};
  ForestParams p;
  p.features_per_split = 13;
  EXPECT_THROW(train_forest(rows, schema, p, ""), std::invalid_argument);
  p = {};
  p.bootstrap_fraction = 0.0;
  EXPECT_THROW(train_forest(rows, schema, p, ""), std::invalid_argument);
  p = {};
  p.n_trees = 0;
  EXPECT_THROW(train_forest(rows, schema, p, ""), std::invalid_argument);
  EXPECT_THROW(train_forest({}, schema, ForestParams{}, ""), std::invalid_argument);
  std::vector<LabeledRow> narrow{{std::vector<double>(3, 0.0), E}};
  EXPECT_THROW(train_forest(narrow, schema, ForestParams{}, ""), std::invalid_argument);
}

TEST(ForestParams, ResolvedFeaturesPerSplit) {
  ForestParams p;
  EXPECT_EQ(p.resolved_features_per_split(1), 1);
  EXPECT_EQ(p.resolved_features_per_split(12), 4);
  EXPECT_EQ(p.resolved_features_per_split(16), 4);
  EXPECT_EQ(p.resolved_features_per_split(17), 5);
  p.features_per_split = 2;
  EXPECT_EQ(p.resolved_features_per_split(16), 2);
}

TEST(Metrics, PerfectPredictor) {
  const std::vector<Label> a{E, H, E, H, H};
  const auto m = metrics_from(a, a);
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.confusion[0][1], 0u);
  EXPECT_EQ(m.confusion[1][0], 0u);
  EXPECT_EQ(m.confusion[0][0], 2u);
  EXPECT_EQ(m.confusion[1][1], 3u);
  EXPECT_EQ(m.precision[0], 1.0);
  EXPECT_EQ(m.recall[1], 1.0);
}

TEST(Metrics, ConstantHardOnBalancedSet) {
  const std::vector<Label> a{E, H, E, H};
  const std::vector<Label> p{H, H, H, H};
  const auto m = metrics_from(a, p);
  EXPECT_EQ(m.accuracy, 0.5);
  EXPECT_EQ(m.recall[0], 0.0);
  EXPECT_EQ(m.precision[0], 0.0);
  EXPECT_EQ(m.recall[1], 1.0);
  EXPECT_EQ(m.precision[1], 0.5);
  EXPECT_EQ(m.total(), 4u);
  EXPECT_EQ(m.confusion[0][1], 2u);
  EXPECT_THROW(metrics_from({}, {}), std::invalid_argument);
  EXPECT_THROW(metrics_from(a, std::vector<Label>{H}), std::invalid_argument);
}

TEST(Metrics, ConfusionSumsToRows) {
  std::mt19937_64 rng(2);
  const features::FeatureSchema schema(1);
  const auto rows = planted(rng, 90, schema.width());
  ForestParams p;
  p.n_trees = 5;
  const auto model = train_forest(rows, schema, p, "");
  const auto m = evaluate(model, rows);
  EXPECT_EQ(m.total(), rows.size());
  std::size_t correct = 0;
  for (const auto& r : rows) correct += predict_values(model, r.features).label == r.label;
  EXPECT_DOUBLE_EQ(m.accuracy, static_cast<double>(correct) / static_cast<double>(rows.size()));
}

std::vector<IdentifiedRow> identified(std::mt19937_64& rng, std::size_t n, std::size_t width) {
  std::vector<IdentifiedRow> out;
  for (auto& r : planted(rng, n, width)) out.push_back({"f" + std::to_string(out.size()), r});
  return out;
}

TEST(AssignFolds, StratifiedAndGroupedById) {
  std::mt19937_64 rng(6);
  auto rows = identified(rng, 53, 12);
  // Some ids repeat; they must land in one fold.
  rows[10].function_id = rows[3].function_id;
  rows[20].function_id = rows[3].function_id;
  rows[20].row.label = rows[3].row.label;
  rows[10].row.label = rows[3].row.label;
  const auto folds = assign_folds(rows, 5, 17);
  ASSERT_EQ(folds.size(), rows.size());
  EXPECT_EQ(folds[3], folds[10]);
  EXPECT_EQ(folds[3], folds[20]);
  std::array<std::array<int, 2>, 5> per{};
  std::set<std::string> seen;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ASSERT_GE(folds[i], 0);
    ASSERT_LT(folds[i], 5);
    if (seen.insert(rows[i].function_id).second) ++per[folds[i]][class_index(rows[i].row.label)];
  }
  for (int c = 0; c < 2; ++c) {
    int lo = 1 << 30, hi = 0;
    for (const auto& f : per) lo = std::min(lo, f[c]), hi = std::max(hi, f[c]);
    EXPECT_LE(hi - lo, 1) << "class " << c;
  }
  EXPECT_EQ(folds, assign_folds(rows, 5, 17));
  EXPECT_THROW(assign_folds(rows, 1, 0), std::invalid_argument);
  EXPECT_THROW(assign_folds(std::span(rows).first(3), 5, 0), std::invalid_argument);
}

TEST(CrossValidate, FoldMetricsCoverEveryRow) {
  std::mt19937_64 rng(12);
  const auto rows = identified(rng, 50, 12);
  ForestParams p;
  p.n_trees = 7;
  const auto cv = cross_validate(rows, features::FeatureSchema(1), p, 5);
  ASSERT_EQ(cv.folds.size(), 5u);
  std::uint64_t total = 0;
  double sum = 0;
  for (const auto& f : cv.folds) total += f.total(), sum += f.accuracy;
  EXPECT_EQ(total, 50u);
  EXPECT_EQ(cv.pooled.total(), 50u);
  EXPECT_DOUBLE_EQ(cv.mean_accuracy, sum / 5);
  const auto again = cross_validate(rows, features::FeatureSchema(1), p, 5, 3);
  EXPECT_EQ(again.mean_accuracy, cv.mean_accuracy);
}

} // namespace
} // namespace agile::forest
