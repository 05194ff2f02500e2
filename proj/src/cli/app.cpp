#include "agile/cli/app.hpp"

#include <algorithm>
#include <ostream>

#include "CLI11.hpp"
#include "agile/cli/commands.hpp"

namespace agile::cli {

namespace {

void add_forest_options(CLI::App* cmd, ForestOverrides& f) {
  cmd->add_option("--trees", f.n_trees, "Number of trees")->check(CLI::PositiveNumber);
  cmd->add_option("--max-tree-depth", f.max_tree_depth, "Depth limit per tree")->check(CLI::PositiveNumber);
  cmd->add_option("--min-leaf", f.min_samples_leaf, "Minimum rows per leaf")->check(CLI::PositiveNumber);
  cmd->add_option("--mtry", f.features_per_split, "Candidate features per split (default: ceil(sqrt(width)))")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--bootstrap", f.bootstrap_fraction, "Bootstrap sample fraction in (0, 1]");
  cmd->add_option("--workers", f.workers, "Threads used to grow trees")->check(CLI::PositiveNumber);
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Classify functions as easy or hard to optimize from static loop features", "agilec"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Seed for generation, labeling data and training");
  app.add_option("--config", global.config, "JSON config for the command");
  app.add_option("--out", global.out, "Output path (directory for gen); stdout when omitted");
  app.add_flag("--strict", global.strict, "Abort on the first parse diagnostic");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic corpus");
  gen_cmd->add_option("-n,--functions", gen.n_functions, "Number of functions (overrides config)")
      ->check(CLI::PositiveNumber);

  ExtractOptions extract;
  int max_depth = 0;
  auto* extract_cmd = app.add_subcommand("extract", "Extract feature vectors into a manifest");
  extract_cmd->add_option("sources", extract.sources, "Source files or directories")->required();
  auto* fit = extract_cmd->add_flag("--fit-schema", "Fit max_depth to the sources (default)");
  extract_cmd->add_option("--max-depth", max_depth, "Use a fixed schema depth")->excludes(fit);

  LabelOptions label;
  auto* label_cmd = app.add_subcommand("label", "Measure and label manifest rows");
  label_cmd->add_option("manifest", label.manifest, "Manifest from extract")->required();
  label_cmd->add_option("--fake-timer", label.fake_timer, "Table of 'function_id t_basic t_aggr' lines");
  label_cmd->add_option("--delta", label.delta, "Easy iff t_aggr / t_basic > delta");
  label_cmd->add_option("--jobs", label.jobs, "Concurrent compilations");
  label_cmd->add_option("--work-dir", label.work_dir, "Keep drivers and binaries here");

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a random forest on labeled rows");
  train_cmd->add_option("manifest", train.manifest, "Labeled manifest")->required();
  add_forest_options(train_cmd, train.forest);

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model or cross-validate");
  eval_cmd->add_option("manifest", eval.manifest, "Labeled manifest")->required();
  auto* model_opt = eval_cmd->add_option("--model", eval.model, "Model file");
  eval_cmd->add_option("--cv", eval.cv, "k-fold cross-validation")->check(CLI::Range(2, 1000))->excludes(model_opt);
  add_forest_options(eval_cmd, eval.forest);

  ClassifyOptions classify;
  auto* classify_cmd = app.add_subcommand("classify", "Classify the functions of a source file");
  classify_cmd->add_option("source", classify.source, "Source file")->required();
  classify_cmd->add_option("--model", classify.model, "Model file")->required();

  ExportOptions exp;
  auto* export_cmd = app.add_subcommand("export", "Export a model as C decision code");
  export_cmd->add_option("--model", exp.model, "Model file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFatal;
  }
  if (max_depth != 0) extract.max_depth = max_depth;

  if (gen_cmd->parsed()) return cmd_gen(global, gen, out, err);
  if (extract_cmd->parsed()) return cmd_extract(global, extract, out, err);
  if (label_cmd->parsed()) return cmd_label(global, label, out, err);
  if (train_cmd->parsed()) return cmd_train(global, train, out, err);
  if (eval_cmd->parsed()) return cmd_eval(global, eval, out, err);
  if (classify_cmd->parsed()) return cmd_classify(global, classify, out, err);
  if (export_cmd->parsed()) return cmd_export(global, exp, out, err);
  return kExitFatal;
}

} // namespace agile::cli
