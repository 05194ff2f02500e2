#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "agile/common/label.hpp"
#include "agile/common/rng.hpp"
#include "agile/features/features.hpp"
#include "agile/forest/split.hpp"

namespace agile::forest {

struct ForestParams {
  int n_trees = 25;
  int max_tree_depth = 12;
  int min_samples_leaf = 2;
  int features_per_split = 0;  // 0 resolves to ceil(sqrt(width)) at training time
  double bootstrap_fraction = 1.0;
  std::uint64_t rng_seed = 0;

  /// Throws std::invalid_argument if any field is out of range for `width`.
  void validate(std::size_t width) const;
  int resolved_features_per_split(std::size_t width) const;
};

struct TreeNode {
  bool leaf = true;
  // Internal nodes
  std::size_t feature = 0;
  double threshold = 0.0;
  std::size_t left = 0;
  std::size_t right = 0;
  // Leaves
  Label label = Label::Hard;
  ClassCounts class_counts{0, 0};
};

/// Nodes in preorder; node 0 is the root and children always follow their
/// parent, so evaluation terminates.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  Label predict(std::span<const double> x) const;
  /// Index of the leaf reached by x.
  std::size_t leaf_index(std::span<const double> x) const;
  int depth() const;
};

struct RandomForest {
  std::vector<DecisionTree> trees;
  features::FeatureSchema schema{1};
  ForestParams params;
  std::string training_fingerprint;
};

struct Prediction {
  Label label = Label::Hard;
  int easy_votes = 0;
  int hard_votes = 0;
};

/// Majority label; exact ties go to Hard.
Label majority(ClassCounts counts);

/// With-replacement sample of max(1, round(fraction * n)) row indices.
std::vector<std::size_t> draw_bootstrap(std::size_t n, double fraction, Rng& rng);

/// Grows a tree on the given sample. Candidate features are drawn from `rng`
/// at every node in preorder.
DecisionTree grow_tree(std::span<const LabeledRow> rows, std::span<const std::size_t> sample,
                       const ForestParams& params, std::size_t width, Rng& rng);

/// Bootstrap draw followed by grow_tree, both from `rng`.
DecisionTree build_tree(std::span<const LabeledRow> rows, const ForestParams& params,
                        std::size_t width, Rng& rng);

/// Trains params.n_trees trees; tree t uses the stream seeded with
/// rng_seed XOR t, so the result does not depend on `workers`.
RandomForest train_forest(std::span<const LabeledRow> rows, const features::FeatureSchema& schema,
                          ForestParams params, std::string training_fingerprint,
                          unsigned workers = 1);

/// Throws std::invalid_argument if the vector's schema differs from the model's.
Prediction predict(const RandomForest& model, const features::FeatureVector& x);
/// Throws std::invalid_argument if x.size() differs from the schema width.
Prediction predict_values(const RandomForest& model, std::span<const double> x);

} // namespace agile::forest
