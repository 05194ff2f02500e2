#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "agile/common/label.hpp"

namespace agile::forest {

struct LabeledRow {
  std::vector<double> features;
  Label label = Label::Hard;
};

/// (easy, hard)
using ClassCounts = std::array<std::uint64_t, 2>;

/// 1 - p_easy^2 - p_hard^2. Throws std::invalid_argument when both counts
/// are zero.
double gini(ClassCounts counts);

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity_decrease = 0.0;  // parent Gini minus size-weighted child Gini
};

/// Exhaustive axis-aligned split search over the rows selected by `sample`
/// (indices may repeat). Thresholds are midpoints between consecutive
/// distinct values; rows with value <= threshold go left. Scores are
/// compared exactly in integer arithmetic, so ties resolve to the lower
/// feature index and then the lower threshold. Returns nullopt when no
/// admissible split strictly reduces impurity.
std::optional<Split> best_split(std::span<const LabeledRow> rows,
                                std::span<const std::size_t> sample,
                                std::span<const std::size_t> candidate_features,
                                std::size_t min_samples_leaf = 1);

} // namespace agile::forest
