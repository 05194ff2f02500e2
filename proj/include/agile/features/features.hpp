#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "agile/parser/ast.hpp"

namespace agile::features {

/// Number of loop-block and non-loop scalar slots (five each).
inline constexpr int kLoopCountSlots = 5;
inline constexpr int kNonLoopSlots = 5;

/// Slot layout for a corpus-wide maximum nest depth:
///   niter_known[0..max_depth), niter_symbolic[0..max_depth),
///   loop_num_{logical_ops,arith_ops,branches,arrays,scalars},
///   num_{logical_ops,arith_ops,branches,arrays,scalars}
class FeatureSchema {
 public:
  explicit FeatureSchema(int max_depth);

  int max_depth() const { return max_depth_; }
  std::size_t width() const { return static_cast<std::size_t>(2 * max_depth_ + 10); }
  std::vector<std::string> layout() const;

  std::size_t niter_known_slot(int d) const { return static_cast<std::size_t>(d); }
  std::size_t niter_symbolic_slot(int d) const { return static_cast<std::size_t>(max_depth_ + d); }
  std::size_t loop_count_slot(int k) const { return static_cast<std::size_t>(2 * max_depth_ + k); }
  std::size_t nonloop_slot(int k) const { return static_cast<std::size_t>(2 * max_depth_ + 5 + k); }

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;

 private:
  int max_depth_;
};

struct FeatureVector {
  FeatureSchema schema;
  std::vector<double> values;
};

/// Thrown when a nest is deeper than the schema allows; the schema has to be
/// refitted over a corpus that includes the function.
class SchemaDepthError : public std::runtime_error {
 public:
  SchemaDepthError(int depth, int max_depth);
  int depth() const { return depth_; }

 private:
  int depth_;
};

/// Raw per-nest features before reduction.
struct NestRecord {
  std::vector<double> niter_known;     // length max_depth, zero-padded
  std::vector<double> niter_symbolic;  // 1 where the trip count is symbolic
  std::array<double, kLoopCountSlots> counts{};  // logical, arith, branches, arrays, scalars
};

NestRecord nest_features(const parser::LoopNest& nest, int max_depth);

/// Depth-weighted average of per-nest records, element-wise over every slot.
/// Throws std::invalid_argument on empty input or mismatched lengths.
NestRecord reduce_nests(std::span<const NestRecord> records, std::span<const int> depths);

FeatureVector extract(const parser::FunctionUnit& fn, const FeatureSchema& schema);

/// Largest nest depth in the corpus, floored at 1.
int compute_max_depth(std::span<const parser::FunctionUnit> corpus);

} // namespace agile::features
