#include "agile/forest/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "agile/common/parallel.hpp"

namespace agile::forest {

void ForestParams::validate(std::size_t width) const {
  if (width == 0) throw std::invalid_argument("forest: schema width is zero");
  if (n_trees < 1) throw std::invalid_argument("forest: n_trees must be positive");
  if (max_tree_depth < 1) throw std::invalid_argument("forest: max_tree_depth must be positive");
  if (min_samples_leaf < 1) throw std::invalid_argument("forest: min_samples_leaf must be positive");
  if (features_per_split < 0 || static_cast<std::size_t>(features_per_split) > width)
    throw std::invalid_argument("forest: features_per_split must be in [1, " +
                                std::to_string(width) + "] (0 = auto)");
  if (!(bootstrap_fraction > 0.0 && bootstrap_fraction <= 1.0))
    throw std::invalid_argument("forest: bootstrap_fraction must be in (0, 1]");
}

int ForestParams::resolved_features_per_split(std::size_t width) const {
  if (features_per_split > 0) return features_per_split;
  auto k = static_cast<std::size_t>(std::sqrt(static_cast<double>(width)));
  while (k * k < width) ++k;
  while (k > 1 && (k - 1) * (k - 1) >= width) --k;
  return static_cast<int>(std::max<std::size_t>(k, 1));
}

std::size_t DecisionTree::leaf_index(std::span<const double> x) const {
  if (nodes.empty()) throw std::logic_error("decision tree has no nodes");
  std::size_t i = 0;
  while (!nodes[i].leaf) {
    const auto& n = nodes[i];
    i = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return i;
}

Label DecisionTree::predict(std::span<const double> x) const { return nodes[leaf_index(x)].label; }

int DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  int best = 0;
  std::vector<std::pair<std::size_t, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes[i].leaf) {
      stack.emplace_back(nodes[i].left, d + 1);
      stack.emplace_back(nodes[i].right, d + 1);
    }
  }
  return best;
}

Label majority(ClassCounts counts) { return counts[0] > counts[1] ? Label::Easy : Label::Hard; }

std::vector<std::size_t> draw_bootstrap(std::size_t n, double fraction, Rng& rng) {
  if (n == 0) throw std::invalid_argument("bootstrap: no rows");
  const auto size =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n))));
  std::vector<std::size_t> sample(size);
  for (auto& s : sample) s = uniform_below(rng, n);
  return sample;
}

namespace {

std::vector<std::size_t> draw_features(std::size_t width, std::size_t k, Rng& rng) {
  std::vector<std::size_t> pool(width);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + uniform_below(rng, width - i)]);
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

class Grower {
 public:
  Grower(std::span<const LabeledRow> rows, const ForestParams& params, std::size_t width, Rng& rng)
      : rows_(rows),
        params_(params),
        width_(width),
        k_(static_cast<std::size_t>(params.resolved_features_per_split(width))),
        rng_(rng) {}

  std::size_t grow(std::vector<std::size_t> sample, int depth) {
    ClassCounts counts{0, 0};
    for (auto r : sample) counts[static_cast<std::size_t>(class_index(rows_[r].label))] += 1;
    const std::size_t id = tree_.nodes.size();
    tree_.nodes.emplace_back();

    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    const bool pure = counts[0] == 0 || counts[1] == 0;
    std::optional<Split> split;
    if (!pure && depth < params_.max_tree_depth && sample.size() >= 2 * min_leaf) {
      const auto candidates = draw_features(width_, k_, rng_);
      split = best_split(rows_, sample, candidates, min_leaf);
    }
    if (!split) {
      auto& leaf = tree_.nodes[id];
      leaf.leaf = true;
      leaf.class_counts = counts;
      leaf.label = majority(counts);
      return id;
    }
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto r : sample) (rows_[r].features[split->feature] <= split->threshold ? left : right).push_back(r);
    sample.clear();
    sample.shrink_to_fit();
    const std::size_t l = grow(std::move(left), depth + 1);
    const std::size_t r = grow(std::move(right), depth + 1);
    auto& node = tree_.nodes[id];
    node.leaf = false;
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  DecisionTree take() { return std::move(tree_); }

 private:
  std::span<const LabeledRow> rows_;
  const ForestParams& params_;
  std::size_t width_;
  std::size_t k_;
  Rng& rng_;
  DecisionTree tree_;
};

void check_rows(std::span<const LabeledRow> rows, std::size_t width) {
  if (rows.empty()) throw std::invalid_argument("forest: no training rows");
  for (const auto& row : rows)
    if (row.features.size() != width)
      throw std::invalid_argument("forest: row has " + std::to_string(row.features.size()) +
                                  " features, schema width is " + std::to_string(width));
}

} // namespace

DecisionTree grow_tree(std::span<const LabeledRow> rows, std::span<const std::size_t> sample,
                       const ForestParams& params, std::size_t width, Rng& rng) {
  params.validate(width);
  check_rows(rows, width);
  if (sample.empty()) throw std::invalid_argument("forest: empty sample");
  Grower grower(rows, params, width, rng);
  grower.grow(std::vector<std::size_t>(sample.begin(), sample.end()), 0);
  return grower.take();
}

DecisionTree build_tree(std::span<const LabeledRow> rows, const ForestParams& params,
                        std::size_t width, Rng& rng) {
  if (rows.empty()) throw std::invalid_argument("forest: no training rows");
  const auto sample = draw_bootstrap(rows.size(), params.bootstrap_fraction, rng);
  return grow_tree(rows, sample, params, width, rng);
}

RandomForest train_forest(std::span<const LabeledRow> rows, const features::FeatureSchema& schema,
                          ForestParams params, std::string training_fingerprint, unsigned workers) {
  const std::size_t width = schema.width();
  params.validate(width);
  check_rows(rows, width);
  params.features_per_split = params.resolved_features_per_split(width);

  RandomForest model;
  model.schema = schema;
  model.params = params;
  model.training_fingerprint = std::move(training_fingerprint);
  model.trees.resize(static_cast<std::size_t>(params.n_trees));
  parallel_for(model.trees.size(), workers, [&](std::size_t t) {
    Rng rng(params.rng_seed ^ static_cast<std::uint64_t>(t));
    model.trees[t] = build_tree(rows, params, width, rng);
  });
  return model;
}

Prediction predict_values(const RandomForest& model, std::span<const double> x) {
  if (x.size() != model.schema.width())
    throw std::invalid_argument("predict: vector has " + std::to_string(x.size()) +
                                " values, model schema width is " +
                                std::to_string(model.schema.width()));
  Prediction p;
  for (const auto& tree : model.trees) (tree.predict(x) == Label::Easy ? p.easy_votes : p.hard_votes) += 1;
  p.label = p.easy_votes > p.hard_votes ? Label::Easy : Label::Hard;
  return p;
}

Prediction predict(const RandomForest& model, const features::FeatureVector& x) {
  if (!(x.schema == model.schema))
    throw std::invalid_argument("predict: feature schema (max_depth " +
                                std::to_string(x.schema.max_depth()) +
                                ") does not match model (max_depth " +
                                std::to_string(model.schema.max_depth()) + ")");
  return predict_values(model, x.values);
}

} // namespace agile::forest
