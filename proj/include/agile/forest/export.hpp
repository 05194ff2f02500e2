#pragma once

#include <string>

#include "agile/forest/forest.hpp"

namespace agile::forest {

inline constexpr const char* kExportedFunctionName = "forest_classify";

/// Emits `int forest_classify(double x[W], int votes[2])`: one nested
/// if/else block per tree, a vote tally written to votes[0] (easy) and
/// votes[1] (hard), and a return value of 1 for Easy, 0 for Hard. The text
/// is valid C and parses under the project's own grammar.
std::string export_decision_code(const RandomForest& model);

} // namespace agile::forest
