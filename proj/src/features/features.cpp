#include "agile/features/features.hpp"

#include <algorithm>

namespace agile::features {

FeatureSchema::FeatureSchema(int max_depth) : max_depth_(max_depth) {
  if (max_depth < 1) throw std::invalid_argument("max_depth must be positive");
}

std::vector<std::string> FeatureSchema::layout() const {
  std::vector<std::string> names;
  names.reserve(width());
  for (int d = 0; d < max_depth_; ++d) names.push_back("niter_known_" + std::to_string(d));
  for (int d = 0; d < max_depth_; ++d) names.push_back("niter_symbolic_" + std::to_string(d));
  for (const char* prefix : {"loop_num_", "num_"})
    for (const char* name : {"logical_ops", "arith_ops", "branches", "arrays", "scalars"})
      names.push_back(std::string(prefix) + name);
  return names;
}

SchemaDepthError::SchemaDepthError(int depth, int max_depth)
    : std::runtime_error("loop nest depth " + std::to_string(depth) + " exceeds schema max_depth " +
                         std::to_string(max_depth) + "; rebuild the schema with --fit-schema"),
      depth_(depth) {}

namespace {

std::array<double, kLoopCountSlots> as_slots(const parser::OpCounts& c) {
  return {static_cast<double>(c.logical_ops), static_cast<double>(c.arith_ops),
          static_cast<double>(c.branches), static_cast<double>(c.arrays),
          static_cast<double>(c.scalars)};
}

} // namespace

NestRecord nest_features(const parser::LoopNest& nest, int max_depth) {
  if (nest.depth > max_depth) throw SchemaDepthError(nest.depth, max_depth);
  NestRecord r;
  r.niter_known.assign(static_cast<std::size_t>(max_depth), 0.0);
  r.niter_symbolic.assign(static_cast<std::size_t>(max_depth), 0.0);
  for (std::size_t d = 0; d < nest.trip_counts.size(); ++d) {
    const auto& trip = nest.trip_counts[d];
    if (trip.is_known()) {
      r.niter_known[d] = static_cast<double>(trip.value);
    } else {
      r.niter_symbolic[d] = 1.0;
    }
  }
  r.counts = as_slots(nest.body_counts);
  return r;
}

NestRecord reduce_nests(std::span<const NestRecord> records, std::span<const int> depths) {
  if (records.empty()) throw std::invalid_argument("reduce_nests: no loop nests to reduce");
  if (records.size() != depths.size()) throw std::invalid_argument("reduce_nests: one depth per record");
  const std::size_t width = records.front().niter_known.size();
  NestRecord sum;
  sum.niter_known.assign(width, 0.0);
  sum.niter_symbolic.assign(width, 0.0);
  double total_weight = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.niter_known.size() != width || r.niter_symbolic.size() != width)
      throw std::invalid_argument("reduce_nests: records built for different max_depth");
    const double w = depths[i];
    if (w <= 0) throw std::invalid_argument("reduce_nests: depths must be positive");
    total_weight += w;
    for (std::size_t d = 0; d < width; ++d) {
      sum.niter_known[d] += w * r.niter_known[d];
      sum.niter_symbolic[d] += w * r.niter_symbolic[d];
    }
    for (std::size_t k = 0; k < sum.counts.size(); ++k) sum.counts[k] += w * r.counts[k];
  }
  for (auto& v : sum.niter_known) v /= total_weight;
  for (auto& v : sum.niter_symbolic) v /= total_weight;
  for (auto& v : sum.counts) v /= total_weight;
  return sum;
}

FeatureVector extract(const parser::FunctionUnit& fn, const FeatureSchema& schema) {
  FeatureVector fv{schema, std::vector<double>(schema.width(), 0.0)};
  if (!fn.loop_nests.empty()) {
    std::vector<NestRecord> records;
    std::vector<int> depths;
    for (const auto& nest : fn.loop_nests) {
      records.push_back(nest_features(nest, schema.max_depth()));
      depths.push_back(nest.depth);
    }
    const NestRecord block = reduce_nests(records, depths);
    for (int d = 0; d < schema.max_depth(); ++d) {
      fv.values[schema.niter_known_slot(d)] = block.niter_known[static_cast<std::size_t>(d)];
      fv.values[schema.niter_symbolic_slot(d)] = block.niter_symbolic[static_cast<std::size_t>(d)];
    }
    for (int k = 0; k < kLoopCountSlots; ++k)
      fv.values[schema.loop_count_slot(k)] = block.counts[static_cast<std::size_t>(k)];
  }
  const auto nonloop = as_slots(fn.nonloop_counts);
  for (int k = 0; k < kNonLoopSlots; ++k)
    fv.values[schema.nonloop_slot(k)] = nonloop[static_cast<std::size_t>(k)];
  return fv;
}

int compute_max_depth(std::span<const parser::FunctionUnit> corpus) {
  int best = 1;
  for (const auto& fn : corpus)
    for (const auto& nest : fn.loop_nests) best = std::max(best, nest.depth);
  return best;
}

} // namespace agile::features
