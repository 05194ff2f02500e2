#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "agile/forest/forest.hpp"

namespace agile::forest {

struct Metrics {
  /// confusion[actual][predicted], indexed by class_index (easy = 0).
  std::array<std::array<std::uint64_t, 2>, 2> confusion{};
  double accuracy = 0.0;
  std::array<double, 2> precision{};  // 0 when nothing was predicted for the class
  std::array<double, 2> recall{};     // 0 when the class is absent
  std::uint64_t total() const;
};

/// Builds metrics from (actual, predicted) pairs. Throws on empty input.
Metrics metrics_from(std::span<const Label> actual, std::span<const Label> predicted);

Metrics evaluate(const RandomForest& model, std::span<const LabeledRow> rows);

struct IdentifiedRow {
  std::string function_id;
  LabeledRow row;
};

/// Fold assignment (0..k-1) for each row: rows sharing a function id share a
/// fold, and ids are dealt round-robin within each label after a seeded
/// shuffle, which stratifies the folds.
std::vector<int> assign_folds(std::span<const IdentifiedRow> rows, int k, std::uint64_t seed);

struct CrossValidation {
  std::vector<Metrics> folds;
  Metrics pooled;
  double mean_accuracy = 0.0;
};

CrossValidation cross_validate(std::span<const IdentifiedRow> rows,
                               const features::FeatureSchema& schema, const ForestParams& params,
                               int k, unsigned workers = 1);

} // namespace agile::forest
