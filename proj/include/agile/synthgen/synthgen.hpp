#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "agile/common/json_io.hpp"
#include "agile/features/features.hpp"
#include "agile/parser/parser.hpp"

namespace agile::synthgen {

struct Range {
  int min = 0;
  int max = 0;
  friend bool operator==(const Range&, const Range&) = default;
};

struct GenConfig {
  std::uint64_t seed = 0;
  int n_functions = 10;
  Range depth_range{1, 3};       // loops per nest
  Range niter_range{8, 256};     // literal trip counts
  double p_symbolic = 0.3;       // chance a loop runs to the symbolic extent N
  Range ops_range{1, 4};         // statements per innermost loop body
  double p_branch = 0.2;         // chance a statement is a ternary
  Range n_arrays_range{1, 3};
  Range n_scalars_range{0, 2};
  Range nests_range{1, 2};       // loop nests per function
  Range nonloop_range{0, 2};     // statements outside loops
  std::string name_prefix = "synth";

  /// Throws std::invalid_argument for empty ranges, probabilities outside
  /// [0, 1] or contradictory settings.
  void validate() const;
  Json to_json() const;
  /// Missing keys keep their defaults; unknown keys are an error.
  static GenConfig from_json(const Json& j);
  std::string hash() const;
};

struct GeneratedFunction {
  std::string name;
  std::uint64_t seed;  // stream the function was drawn from
  parser::SourceUnit source;
};

/// cfg.n_functions single-function sources, each parsing without
/// diagnostics. Same cfg, same bytes.
std::vector<GeneratedFunction> generate(const GenConfig& cfg);

struct SlotStats {
  std::string name;
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

struct Census {
  features::FeatureSchema schema{1};
  std::size_t rows = 0;
  std::vector<SlotStats> slots;
};

/// Parses the corpus, fits a schema over it and summarizes every slot.
/// Throws std::invalid_argument on an empty corpus and ParseError on bad input.
Census feature_census(const std::vector<parser::SourceUnit>& corpus);

} // namespace agile::synthgen
