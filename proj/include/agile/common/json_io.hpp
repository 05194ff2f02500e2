#pragma once

#include <string>

#include "json.hpp"

namespace agile {

using Json = nlohmann::ordered_json;

/// Shortest decimal string that parses back to exactly `value`. Integral
/// values keep a trailing ".0" so they stay floating point on reload.
/// Throws std::domain_error on NaN or infinity.
std::string format_double(double value);

/// Deterministic JSON rendering: insertion-ordered keys, shortest round-trip
/// floats. indent < 0 renders a single line.
std::string canonical_dump(const Json& value, int indent = -1);

} // namespace agile
