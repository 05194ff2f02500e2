#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "agile/common/json_io.hpp"
#include "agile/forest/forest.hpp"
#include "agile/forest/metrics.hpp"

namespace agile::cli {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string config;  // JSON file; meaning depends on the command
  std::string out;     // output file (directory for gen); empty writes to stdout
  bool strict = false;
};

struct GenOptions {
  std::optional<int> n_functions;
};

struct ExtractOptions {
  std::vector<std::string> sources;  // files or directories of .c files
  std::optional<int> max_depth;      // unset: fit the schema to the sources
};

struct LabelOptions {
  std::string manifest;
  std::string fake_timer;  // table file; empty runs the real compiler
  std::optional<double> delta;
  std::optional<unsigned> jobs;
  std::string work_dir;
};

struct ForestOverrides {
  std::optional<int> n_trees;
  std::optional<int> max_tree_depth;
  std::optional<int> min_samples_leaf;
  std::optional<int> features_per_split;
  std::optional<double> bootstrap_fraction;
  unsigned workers = 1;
};

struct TrainOptions {
  std::string manifest;
  ForestOverrides forest;
};

struct EvalOptions {
  std::string manifest;
  std::string model;   // evaluate this model, or
  std::optional<int> cv;  // k-fold cross-validation
  ForestOverrides forest;
};

struct ClassifyOptions {
  std::string source;
  std::string model;
};

struct ExportOptions {
  std::string model;
};

int cmd_gen(const GlobalOptions& global, const GenOptions& options, std::ostream& out, std::ostream& err);
int cmd_extract(const GlobalOptions& global, const ExtractOptions& options, std::ostream& out,
                std::ostream& err);
int cmd_label(const GlobalOptions& global, const LabelOptions& options, std::ostream& out, std::ostream& err);
int cmd_train(const GlobalOptions& global, const TrainOptions& options, std::ostream& out, std::ostream& err);
int cmd_eval(const GlobalOptions& global, const EvalOptions& options, std::ostream& out, std::ostream& err);
int cmd_classify(const GlobalOptions& global, const ClassifyOptions& options, std::ostream& out,
                 std::ostream& err);
int cmd_export(const GlobalOptions& global, const ExportOptions& options, std::ostream& out,
               std::ostream& err);

/// Forest parameters from a JSON object (keys as in the model file); unknown
/// keys are an error.
forest::ForestParams forest_params_from_json(const Json& j);
Json metrics_to_json(const forest::Metrics& m);

} // namespace agile::cli
