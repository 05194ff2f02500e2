#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "agile/labeler/labeler.hpp"
#include "agile/parser/ast.hpp"

namespace agile::labeler {

/// The function cannot be called from a generated driver.
class DriverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Driver {
  std::string source;
  int extent = 0;                          // value bound to every symbolic size
  std::vector<std::string> bound_symbols;  // free identifiers bound to `extent`
  std::vector<std::string> globals;        // free identifiers the function assigns
};

/// Standalone C program around `fn`. It fills the arguments from a seeded
/// generator, calls fn once and prints "checksum <value>": the net change the
/// call made to everything it can write, plus its return value. It then times repeated calls until min_runtime_s has passed
/// and prints "calls <n>" and "time_per_call <seconds>".
Driver synthesize_driver(const parser::FunctionUnit& fn, const LabelerConfig& cfg);

struct DriverOutput {
  std::string checksum;
  long long calls = 0;
  double time_per_call = 0.0;
};

/// Throws RunError when a line is missing or malformed.
DriverOutput parse_driver_output(const std::string& stdout_text);

} // namespace agile::labeler
