#include "agile/cli/commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "agile/cli/manifest.hpp"
#include "agile/common/hash.hpp"
#include "agile/features/features.hpp"
#include "agile/forest/export.hpp"
#include "agile/forest/model_io.hpp"
#include "agile/labeler/labeler.hpp"
#include "agile/parser/parser.hpp"
#include "agile/synthgen/synthgen.hpp"

namespace agile::cli {

namespace fs = std::filesystem;

namespace {

// Reported as a plain message and exit code 1.
class CommandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Fn>
int guarded(const char* name, std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    err << "agilec " << name << ": " << e.what() << "\n";
    return kExitFatal;
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CommandError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CommandError("cannot write " + path.string());
  out << text;
  if (!out) throw CommandError("failed writing " + path.string());
}

Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw CommandError(path.string() + " is not valid JSON");
  }
}

// Main output goes to --out when given, stdout otherwise.
void emit(const GlobalOptions& global, std::ostream& out, const std::string& text) {
  if (global.out.empty()) {
    out << text;
  } else {
    write_file(global.out, text);
  }
}

Json diagnostic_json(const parser::Diagnostic& d) {
  Json j = Json::object();
  j["record"] = "diagnostic";
  j["path"] = d.path;
  j["line"] = d.loc.line;
  j["column"] = d.loc.column;
  j["severity"] = std::string(parser::to_string(d.severity));
  j["kind"] = std::string(parser::to_string(d.kind));
  j["function"] = d.function;
  j["message"] = d.message;
  return j;
}

std::vector<fs::path> expand_sources(const std::vector<std::string>& sources, std::set<std::string>& gen_hashes) {
  std::vector<fs::path> files;
  for (const auto& s : sources) {
    const fs::path p(s);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p))
        if (entry.is_regular_file() && entry.path().extension() == ".c") found.push_back(entry.path());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
      // A generated corpus carries its generator config hash.
      const fs::path corpus = p / "corpus.jsonl";
      if (fs::exists(corpus)) {
        std::istringstream in(read_file(corpus));
        for (std::string line; std::getline(in, line);) {
          if (line.empty()) continue;
          const Json j = Json::parse(line, nullptr, false);
          if (j.is_object() && j.contains("config_hash") && j["config_hash"].is_string())
            gen_hashes.insert(j["config_hash"].get<std::string>());
        }
      }
    } else if (fs::exists(p)) {
      files.push_back(p);
    } else {
      throw CommandError("no such source: " + s);
    }
  }
  if (files.empty()) throw CommandError("no source files given");
  return files;
}

fs::path resolve_source(const std::string& source_path, const fs::path& manifest_path) {
  const fs::path p(source_path);
  if (p.is_absolute() || fs::exists(p)) return p;
  const fs::path beside = manifest_path.parent_path() / p;
  return fs::exists(beside) ? beside : p;
}

forest::ForestParams resolve_forest(const GlobalOptions& global, const ForestOverrides& o) {
  forest::ForestParams params;
  if (!global.config.empty()) params = forest_params_from_json(read_json(global.config));
  if (global.seed) params.rng_seed = *global.seed;
  if (o.n_trees) params.n_trees = *o.n_trees;
  if (o.max_tree_depth) params.max_tree_depth = *o.max_tree_depth;
  if (o.min_samples_leaf) params.min_samples_leaf = *o.min_samples_leaf;
  if (o.features_per_split) params.features_per_split = *o.features_per_split;
  if (o.bootstrap_fraction) params.bootstrap_fraction = *o.bootstrap_fraction;
  return params;
}

labeler::LabelerConfig labeler_config(const GlobalOptions& global) {
  if (global.config.empty()) return {};
  return labeler::LabelerConfig::from_json(read_json(global.config));
}

Json flags_json(const std::vector<std::string>& flags) { return Json(flags); }

} // namespace

forest::ForestParams forest_params_from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("forest params must be a JSON object");
  forest::ForestParams p;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const Json& v = it.value();
    try {
      if (key == "n_trees") p.n_trees = v.get<int>();
      else if (key == "max_tree_depth") p.max_tree_depth = v.get<int>();
      else if (key == "min_samples_leaf") p.min_samples_leaf = v.get<int>();
      else if (key == "features_per_split") p.features_per_split = v.get<int>();
      else if (key == "bootstrap_fraction") p.bootstrap_fraction = v.get<double>();
      else if (key == "rng_seed") p.rng_seed = v.get<std::uint64_t>();
      else throw std::invalid_argument("forest params: unknown key '" + key + "'");
    } catch (const Json::type_error&) {
      throw std::invalid_argument("forest params: wrong type for '" + key + "'");
    }
  }
  return p;
}

Json metrics_to_json(const forest::Metrics& m) {
  Json j = Json::object();
  j["rows"] = m.total();
  j["accuracy"] = m.accuracy;
  Json confusion = Json::object();
  confusion["order"] = Json::array({"easy", "hard"});
  confusion["actual_by_predicted"] =
      Json::array({Json::array({m.confusion[0][0], m.confusion[0][1]}),
                   Json::array({m.confusion[1][0], m.confusion[1][1]})});
  j["confusion"] = confusion;
  j["precision"] = Json::object({{"easy", m.precision[0]}, {"hard", m.precision[1]}});
  j["recall"] = Json::object({{"easy", m.recall[0]}, {"hard", m.recall[1]}});
  return j;
}

int cmd_gen(const GlobalOptions& global, const GenOptions& options, std::ostream& out, std::ostream& err) {
  return guarded("gen", err, [&] {
    if (global.out.empty()) throw CommandError("--out <directory> is required");
    synthgen::GenConfig cfg;
    if (!global.config.empty()) cfg = synthgen::GenConfig::from_json(read_json(global.config));
    if (global.seed) cfg.seed = *global.seed;
    if (options.n_functions) cfg.n_functions = *options.n_functions;
    cfg.validate();
    const auto functions = synthgen::generate(cfg);
    const fs::path dir(global.out);
    fs::create_directories(dir);
    const std::string hash = cfg.hash();
    std::string corpus;
    for (const auto& f : functions) {
      write_file(dir / f.source.path, f.source.text);
      Json rec = Json::object();
      rec["file"] = f.source.path;
      rec["function_id"] = f.name;
      rec["seed"] = f.seed;
      rec["config_hash"] = hash;
      corpus += canonical_dump(rec) + "\n";
    }
    write_file(dir / "corpus.jsonl", corpus);
    write_file(dir / "gen_config.json", canonical_dump(cfg.to_json(), 2) + "\n");
    Json summary = Json::object();
    summary["functions"] = functions.size();
    summary["out"] = dir.string();
    summary["config_hash"] = hash;
    out << canonical_dump(summary) << "\n";
    return kExitOk;
  });
}

int cmd_extract(const GlobalOptions& global, const ExtractOptions& options, std::ostream& out,
                std::ostream& err) {
  return guarded("extract", err, [&] {
    std::set<std::string> gen_hashes;
    const auto files = expand_sources(options.sources, gen_hashes);
    struct Parsed {
      std::string path;
      parser::FunctionUnit fn;
    };
    std::vector<Parsed> parsed;
    std::size_t diagnostics = 0;
    std::set<std::string> ids;
    for (const auto& file : files) {
      parser::SourceUnit src{file.string(), read_file(file)};
      if (src.text.empty()) {
        err << canonical_dump(Json::object({{"record", "diagnostic"}, {"path", src.path},
                                            {"severity", "warning"}, {"message", "empty file"}}))
            << "\n";
        ++diagnostics;
        continue;
      }
      auto result = parser::parse_unit(src, global.strict);
      for (const auto& d : result.diagnostics) err << canonical_dump(diagnostic_json(d)) << "\n";
      diagnostics += result.diagnostics.size();
      for (auto& fn : result.functions) {
        if (!ids.insert(fn.name).second)
          throw CommandError("function '" + fn.name + "' is defined more than once (again in " + src.path + ")");
        parsed.push_back({src.path, std::move(fn)});
      }
    }

    CorpusManifest manifest;
    if (options.max_depth) {
      if (*options.max_depth < 1) throw CommandError("--max-depth must be positive");
      manifest.schema = features::FeatureSchema(*options.max_depth);
    } else {
      std::vector<parser::FunctionUnit> fns;
      for (const auto& p : parsed) fns.push_back(p.fn);
      manifest.schema = features::FeatureSchema(features::compute_max_depth(fns));
    }
    for (const auto& p : parsed) {
      features::FeatureVector v{manifest.schema, {}};
      try {
        v = features::extract(p.fn, manifest.schema);
      } catch (const features::SchemaDepthError& e) {
        throw CommandError("function '" + p.fn.name + "' (" + p.path + "): " + e.what());
      }
      manifest.rows.push_back({p.fn.name, p.path, v.values, std::nullopt, std::nullopt, std::nullopt});
    }
    if (gen_hashes.size() == 1) manifest.config_hashes["generator"] = *gen_hashes.begin();
    else if (gen_hashes.size() > 1) manifest.config_hashes["generator"] = Json(gen_hashes);
    manifest.metadata["schema"] = options.max_depth ? "fixed" : "fitted";
    emit(global, out, manifest_to_text(manifest));
    if (!global.out.empty()) {
      Json summary = Json::object();
      summary["rows"] = manifest.rows.size();
      summary["max_depth"] = manifest.schema.max_depth();
      summary["diagnostics"] = diagnostics;
      out << canonical_dump(summary) << "\n";
    }
    return diagnostics > 0 ? kExitPartial : kExitOk;
  });
}

int cmd_label(const GlobalOptions& global, const LabelOptions& options, std::ostream& out, std::ostream& err) {
  return guarded("label", err, [&] {
    CorpusManifest manifest = load_manifest(options.manifest);
    labeler::LabelerConfig cfg = labeler_config(global);
    if (options.delta) cfg.delta = *options.delta;
    if (options.jobs) cfg.jobs = *options.jobs;
    if (global.seed) cfg.rng_seed = *global.seed;
    if (!options.work_dir.empty()) cfg.work_dir = options.work_dir;
    cfg.validate();

    const bool fake = !options.fake_timer.empty();
    std::vector<labeler::LabelTarget> targets;
    std::vector<std::size_t> row_of;
    std::vector<labeler::Quarantine> early;
    std::map<std::string, parser::ParseResult> parsed_files;
    for (std::size_t i = 0; i < manifest.rows.size(); ++i) {
      auto& row = manifest.rows[i];
      if (row.quarantine_reason) continue;
      labeler::LabelTarget target{row.function_id, {}};
      target.fn.name = row.function_id;
      if (!fake) {
        try {
          const fs::path path = resolve_source(row.source_path, options.manifest);
          auto [it, fresh] = parsed_files.try_emplace(path.string());
          if (fresh) it->second = parser::parse_unit({path.string(), read_file(path)});
          const auto& fns = it->second.functions;
          auto fn = std::find_if(fns.begin(), fns.end(), [&](const auto& f) { return f.name == row.function_id; });
          if (fn == fns.end()) throw CommandError("function not found in " + path.string());
          target.fn = *fn;
        } catch (const std::exception& e) {
          early.push_back({row.function_id, e.what()});
          row.timing.reset();
          row.label.reset();
          row.quarantine_reason = e.what();
          continue;
        }
      }
      targets.push_back(std::move(target));
      row_of.push_back(i);
    }

    labeler::LabelingResult result;
    std::string table_hash;
    if (!targets.empty()) {
      if (fake) {
        const std::string table = read_file(options.fake_timer);
        table_hash = fingerprint(table);
        auto backend = labeler::FakeTimerBackend::from_table(table, cfg.repetitions);
        result = labeler::label_corpus(targets, cfg, backend);
      } else {
        labeler::CompilerBackend backend(cfg);
        result = labeler::label_corpus(targets, cfg, backend);
      }
    }
    std::map<std::string, std::size_t> index_of;
    for (std::size_t k = 0; k < targets.size(); ++k) index_of[targets[k].function_id] = row_of[k];
    for (auto& l : result.labeled) {
      auto& row = manifest.rows[index_of.at(l.function_id)];
      row.timing = l.timing;
      row.label = l.label;
      row.quarantine_reason.reset();
    }
    for (auto& q : result.quarantined) {
      auto& row = manifest.rows[index_of.at(q.function_id)];
      row.timing.reset();
      row.label.reset();
      row.quarantine_reason = q.reason;
    }

    manifest.config_hashes["labeler"] = cfg.hash();
    manifest.metadata["labeler"] = cfg.to_json();
    manifest.metadata["timer"] = fake ? "fake" : "compiler";
    if (fake) manifest.metadata["fake_timer_table"] = table_hash;
    else manifest.metadata.erase("fake_timer_table");
    emit(global, out, manifest_to_text(manifest));

    std::size_t easy = 0, hard = 0;
    for (const auto& l : result.labeled) (l.label == Label::Easy ? easy : hard) += 1;
    const std::size_t quarantined = early.size() + result.quarantined.size();
    for (const auto& q : early) err << "quarantined " << q.function_id << ": " << q.reason << "\n";
    for (const auto& q : result.quarantined) err << "quarantined " << q.function_id << ": " << q.reason << "\n";
    if (!global.out.empty()) {
      Json summary = Json::object();
      summary["labeled"] = result.labeled.size();
      summary["easy"] = easy;
      summary["hard"] = hard;
      summary["quarantined"] = quarantined;
      summary["delta"] = cfg.delta;
      out << canonical_dump(summary) << "\n";
    }
    return quarantined > 0 ? kExitPartial : kExitOk;
  });
}

namespace {

std::vector<forest::IdentifiedRow> labeled_rows(const CorpusManifest& manifest) {
  std::vector<forest::IdentifiedRow> rows;
  for (const auto& r : manifest.rows)
    if (r.label) rows.push_back({r.function_id, {r.features, *r.label}});
  if (rows.empty()) throw CommandError("manifest has no labeled rows");
  return rows;
}

std::vector<forest::LabeledRow> plain(const std::vector<forest::IdentifiedRow>& rows) {
  std::vector<forest::LabeledRow> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.row);
  return out;
}

} // namespace

int cmd_train(const GlobalOptions& global, const TrainOptions& options, std::ostream& out, std::ostream& err) {
  return guarded("train", err, [&] {
    const CorpusManifest manifest = load_manifest(options.manifest);
    const auto params = resolve_forest(global, options.forest);
    const auto rows = plain(labeled_rows(manifest));
    const auto model = forest::train_forest(rows, manifest.schema, params, manifest_fingerprint(manifest),
                                            options.forest.workers);
    emit(global, out, forest::model_to_text(model));
    if (!global.out.empty()) {
      Json summary = Json::object();
      summary["trees"] = model.trees.size();
      summary["rows"] = rows.size();
      summary["training_fingerprint"] = model.training_fingerprint;
      out << canonical_dump(summary) << "\n";
    }
    return kExitOk;
  });
}

int cmd_eval(const GlobalOptions& global, const EvalOptions& options, std::ostream& out, std::ostream& err) {
  return guarded("eval", err, [&] {
    if (options.model.empty() == !options.cv) throw CommandError("give exactly one of --model or --cv");
    const CorpusManifest manifest = load_manifest(options.manifest);
    const auto rows = labeled_rows(manifest);
    Json report = Json::object();
    if (!options.model.empty()) {
      const auto model = forest::load_model(options.model);
      if (!(model.schema == manifest.schema))
        throw CommandError("schema mismatch: model max_depth " + std::to_string(model.schema.max_depth()) +
                           ", manifest max_depth " + std::to_string(manifest.schema.max_depth()));
      report["mode"] = "model";
      report["model_fingerprint"] = model.training_fingerprint;
      report["metrics"] = metrics_to_json(forest::evaluate(model, plain(rows)));
    } else {
      const auto params = resolve_forest(global, options.forest);
      const auto cv = forest::cross_validate(rows, manifest.schema, params, *options.cv, options.forest.workers);
      report["mode"] = "cv";
      report["k"] = *options.cv;
      Json folds = Json::array();
      for (const auto& f : cv.folds) folds.push_back(metrics_to_json(f));
      report["folds"] = folds;
      report["mean_accuracy"] = cv.mean_accuracy;
      report["pooled"] = metrics_to_json(cv.pooled);
    }
    emit(global, out, canonical_dump(report, 2) + "\n");
    return kExitOk;
  });
}

int cmd_classify(const GlobalOptions& global, const ClassifyOptions& options, std::ostream& out,
                 std::ostream& err) {
  return guarded("classify", err, [&] {
    const auto model = forest::load_model(options.model);
    const labeler::LabelerConfig cfg = labeler_config(global);
    const parser::SourceUnit src{options.source, read_file(options.source)};
    const auto parsed = parser::parse_unit(src, global.strict);

    // Functions keep source order; the parser drops the ones it quarantines,
    // so those are merged back in by position.
    struct Entry {
      parser::SourceLoc loc;
      Json row;
    };
    std::vector<Entry> entries;
    std::size_t easy = 0, hard = 0, quarantined = 0;
    for (const auto& fn : parsed.functions) {
      Json row = Json::object();
      row["name"] = fn.name;
      try {
        const auto p = forest::predict(model, features::extract(fn, model.schema));
        row["label"] = std::string(to_string(p.label));
        row["votes"] = Json::object({{"easy", p.easy_votes}, {"hard", p.hard_votes}});
        row["recommended_flags"] = flags_json(p.label == Label::Easy ? cfg.flags_basic : cfg.flags_aggr);
        (p.label == Label::Easy ? easy : hard) += 1;
      } catch (const features::SchemaDepthError& e) {
        row = Json::object({{"name", fn.name}, {"quarantine_reason", e.what()}});
        ++quarantined;
      }
      entries.push_back({fn.loc, row});
    }
    std::set<std::string> reported;
    for (const auto& d : parsed.diagnostics) {
      err << canonical_dump(diagnostic_json(d)) << "\n";
      const std::string name = d.function.empty() ? "<file scope>" : d.function;
      if (!reported.insert(name).second) continue;
      entries.push_back({d.loc, Json::object({{"name", name}, {"quarantine_reason", d.format()}})});
      ++quarantined;
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      return a.loc.line != b.loc.line ? a.loc.line < b.loc.line : a.loc.column < b.loc.column;
    });

    Json report = Json::object();
    report["source"] = src.path;
    report["model_fingerprint"] = model.training_fingerprint;
    Json functions = Json::array();
    for (auto& e : entries) functions.push_back(std::move(e.row));
    report["functions"] = functions;
    report["summary"] = Json::object({{"functions", entries.size()},
                                      {"easy", easy},
                                      {"hard", hard},
                                      {"quarantined", quarantined}});
    emit(global, out, canonical_dump(report, 2) + "\n");
    return quarantined > 0 ? kExitPartial : kExitOk;
  });
}

int cmd_export(const GlobalOptions& global, const ExportOptions& options, std::ostream& out,
               std::ostream& err) {
  return guarded("export", err, [&] {
    const auto model = forest::load_model(options.model);
    emit(global, out, forest::export_decision_code(model));
    return kExitOk;
  });
}

} // namespace agile::cli
