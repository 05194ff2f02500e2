#pragma once

// Slow, obviously-correct reference implementations used to check the
// optimized code paths.

#include <algorithm>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "agile/forest/forest.hpp"

namespace agile::test {

struct OracleSplit {
  std::size_t feature;
  double threshold;
  double decrease;
};

inline double oracle_gini(double easy, double hard) {
  const double n = easy + hard;
  return 1.0 - (easy / n) * (easy / n) - (hard / n) * (hard / n);
}

// Tries every (feature, midpoint) pair, scoring each from scratch.
inline std::optional<OracleSplit> brute_force_split(const std::vector<forest::LabeledRow>& rows,
                                                    const std::vector<std::size_t>& sample,
                                                    const std::vector<std::size_t>& features,
                                                    std::size_t min_leaf) {
  double pe = 0, ph = 0;
  for (auto r : sample) (rows[r].label == Label::Easy ? pe : ph) += 1;
  const double parent = oracle_gini(pe, ph);
  const double n = static_cast<double>(sample.size());
  std::optional<OracleSplit> best;
  std::vector<std::size_t> sorted_features = features;
  std::sort(sorted_features.begin(), sorted_features.end());
  for (auto f : sorted_features) {
    std::set<double> values;
    for (auto r : sample) values.insert(rows[r].features[f]);
    std::vector<double> v(values.begin(), values.end());
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      const double t = (v[i] + v[i + 1]) / 2;
      double le = 0, lh = 0, re = 0, rh = 0;
      for (auto r : sample) {
        const bool left = rows[r].features[f] <= t;
        const bool easy = rows[r].label == Label::Easy;
        (left ? (easy ? le : lh) : (easy ? re : rh)) += 1;
      }
      if (le + lh < min_leaf || re + rh < min_leaf) continue;
      const double child = (le + lh) / n * oracle_gini(le, lh) + (re + rh) / n * oracle_gini(re, rh);
      const double decrease = parent - child;
      if (decrease <= 1e-12) continue;
      // Ties keep the earlier (feature, threshold).
      if (!best || decrease > best->decrease + 1e-12) best = OracleSplit{f, t, decrease};
    }
  }
  return best;
}

// Walks a tree node by node.
inline Label oracle_route(const forest::DecisionTree& tree, const std::vector<double>& x) {
  std::size_t i = 0;
  for (std::size_t steps = 0; steps <= tree.nodes.size(); ++steps) {
    const auto& node = tree.nodes.at(i);
    if (node.leaf) return node.label;
    i = x.at(node.feature) <= node.threshold ? node.left : node.right;
  }
  throw std::logic_error("tree walk did not terminate");
}

struct OracleVotes {
  int easy = 0;
  int hard = 0;
  Label label() const { return easy > hard ? Label::Easy : Label::Hard; }
};

inline OracleVotes recount_votes(const forest::RandomForest& model, const std::vector<double>& x) {
  OracleVotes v;
  for (const auto& tree : model.trees) (oracle_route(tree, x) == Label::Easy ? v.easy : v.hard) += 1;
  return v;
}

// Rows whose features are small integers, so duplicates and ties are common.
inline std::vector<forest::LabeledRow> random_rows(std::mt19937_64& rng, std::size_t n, std::size_t width,
                                                   int levels = 6) {
  std::uniform_int_distribution<int> value(0, levels - 1);
  std::bernoulli_distribution coin(0.5);
  std::vector<forest::LabeledRow> rows(n);
  for (auto& r : rows) {
    for (std::size_t f = 0; f < width; ++f) r.features.push_back(value(rng) * 0.5);
    r.label = coin(rng) ? Label::Easy : Label::Hard;
  }
  return rows;
}

} // namespace agile::test
