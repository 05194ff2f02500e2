#include "agile/labeler/labeler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>

#include <stdlib.h>

#include "agile/common/hash.hpp"
#include "agile/common/parallel.hpp"
#include "agile/labeler/driver.hpp"
#include "agile/labeler/process.hpp"

namespace agile::labeler {

namespace fs = std::filesystem;

void LabelerConfig::validate() const {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("labeler: delta must be in (0, 1]");
  if (repetitions < 1 || repetitions % 2 == 0)
    throw std::invalid_argument("labeler: repetitions must be a positive odd number");
  if (!(timeout_s > 0.0)) throw std::invalid_argument("labeler: timeout_s must be positive");
  if (!(min_runtime_s >= 0.0)) throw std::invalid_argument("labeler: min_runtime_s must be nonnegative");
  if (array_extent < 1) throw std::invalid_argument("labeler: array_extent must be positive");
  if (compiler_cmd.find("{source}") == std::string::npos ||
      compiler_cmd.find("{output}") == std::string::npos)
    throw std::invalid_argument("labeler: compiler_cmd needs {source} and {output} placeholders");
}

Json LabelerConfig::to_json() const {
  Json j = Json::object();
  j["delta"] = delta;
  j["compiler_cmd"] = compiler_cmd;
  j["flags_basic"] = flags_basic;
  j["flags_aggr"] = flags_aggr;
  j["repetitions"] = repetitions;
  j["timeout_s"] = timeout_s;
  j["min_runtime_s"] = min_runtime_s;
  j["array_extent"] = array_extent;
  j["rng_seed"] = rng_seed;
  return j;
}

namespace {

std::vector<std::string> split_words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

std::vector<std::string> flag_list(const Json& v, const std::string& key) {
  if (v.is_string()) return split_words(v.get<std::string>());
  if (v.is_array()) {
    std::vector<std::string> out;
    for (const auto& f : v) {
      if (!f.is_string()) throw std::invalid_argument("labeler config: " + key + " must hold strings");
      out.push_back(f.get<std::string>());
    }
    return out;
  }
  throw std::invalid_argument("labeler config: " + key + " must be a string or a list of strings");
}

} // namespace

LabelerConfig LabelerConfig::from_json(const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("labeler config must be a JSON object");
  LabelerConfig cfg;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const Json& v = it.value();
    try {
      if (key == "delta") cfg.delta = v.get<double>();
      else if (key == "compiler_cmd") cfg.compiler_cmd = v.get<std::string>();
      else if (key == "flags_basic") cfg.flags_basic = flag_list(v, key);
      else if (key == "flags_aggr") cfg.flags_aggr = flag_list(v, key);
      else if (key == "repetitions") cfg.repetitions = v.get<int>();
      else if (key == "timeout_s") cfg.timeout_s = v.get<double>();
      else if (key == "min_runtime_s") cfg.min_runtime_s = v.get<double>();
      else if (key == "array_extent") cfg.array_extent = v.get<int>();
      else if (key == "rng_seed") cfg.rng_seed = v.get<std::uint64_t>();
      else if (key == "jobs") cfg.jobs = v.get<unsigned>();
      else if (key == "work_dir") cfg.work_dir = v.get<std::string>();
      else throw std::invalid_argument("labeler config: unknown key '" + key + "'");
    } catch (const Json::type_error&) {
      throw std::invalid_argument("labeler config: wrong type for '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

std::string LabelerConfig::hash() const { return fingerprint(canonical_dump(to_json())); }

Label label_from_ratio(double t_basic, double t_aggr, double delta) {
  if (!(t_basic > 0.0) || !(t_aggr > 0.0))
    throw std::invalid_argument("label_from_ratio: times must be positive");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("label_from_ratio: delta must be in (0, 1]");
  return t_aggr / t_basic > delta ? Label::Easy : Label::Hard;
}

double median_of_odd(std::vector<double> samples) {
  if (samples.empty() || samples.size() % 2 == 0)
    throw std::invalid_argument("median_of_odd: need an odd number of samples");
  const auto mid = samples.begin() + static_cast<std::ptrdiff_t>(samples.size() / 2);
  std::nth_element(samples.begin(), mid, samples.end());
  return *mid;
}

TimingRecord TimingRecord::from_samples(std::vector<double> basic, std::vector<double> aggr) {
  TimingRecord t;
  t.t_basic = median_of_odd(basic);
  t.t_aggr = median_of_odd(aggr);
  if (!(t.t_basic > 0.0) || !(t.t_aggr > 0.0)) throw RunError("median time is not positive");
  t.ratio = t.t_aggr / t.t_basic;
  t.samples_basic = std::move(basic);
  t.samples_aggr = std::move(aggr);
  return t;
}

std::vector<std::string> expand_command(const std::string& command_template,
                                        const std::vector<std::string>& flags,
                                        const fs::path& source, const fs::path& output) {
  std::vector<std::string> argv;
  for (const auto& word : split_words(command_template)) {
    if (word == "{flags}") {
      argv.insert(argv.end(), flags.begin(), flags.end());
      continue;
    }
    std::string w = word;
    for (const auto& [key, value] : {std::pair<std::string, std::string>{"{source}", source.string()},
                                     {"{output}", output.string()}}) {
      for (auto pos = w.find(key); pos != std::string::npos; pos = w.find(key, pos + value.size()))
        w.replace(pos, key.size(), value);
    }
    argv.push_back(w);
  }
  if (argv.empty()) throw std::invalid_argument("empty compiler command");
  return argv;
}

void compile_variant(const fs::path& source, const std::vector<std::string>& flags,
                     const fs::path& output, const LabelerConfig& cfg) {
  const auto argv = expand_command(cfg.compiler_cmd, flags, source, output);
  ProcessResult r;
  try {
    r = run_process(argv, {cfg.timeout_s, {}});
  } catch (const SpawnError& e) {
    throw CompileError(std::string("compiler could not be started: ") + e.what(), "");
  }
  if (r.timed_out) throw TimeoutError("compiler timed out after " + format_double(cfg.timeout_s) + " s");
  if (!r.ok()) {
    std::string first_line = r.err.substr(0, r.err.find('\n'));
    throw CompileError("compilation failed (exit " + std::to_string(r.exit_code) + "): " + first_line, r.err);
  }
  if (!fs::exists(output)) throw CompileError("compiler produced no output file", r.err);
}

namespace {

std::mutex& measurement_mutex() {
  static std::mutex m;
  return m;
}

DriverOutput run_once(const fs::path& binary, const LabelerConfig& cfg) {
  // Auto-scaling already bounds one run near min_runtime_s; the timeout
  // catches kernels whose single call is too slow.
  ProcessResult r;
  try {
    r = run_process({binary.string()}, {cfg.timeout_s, {}});
  } catch (const SpawnError& e) {
    throw RunError(e.what());
  }
  if (r.timed_out) throw TimeoutError(binary.filename().string() + " timed out after " +
                                      format_double(cfg.timeout_s) + " s");
  if (r.signal != 0) throw RunError(binary.filename().string() + " killed by signal " + std::to_string(r.signal));
  if (r.exit_code != 0) throw RunError(binary.filename().string() + " exited with " + std::to_string(r.exit_code));
  return parse_driver_output(r.out);
}

} // namespace

Measurement measure(const fs::path& binary, const LabelerConfig& cfg) {
  std::lock_guard lock(measurement_mutex());
  Measurement m;
  m.checksum = run_once(binary, cfg).checksum;
  for (int i = 0; i < cfg.repetitions; ++i) {
    const auto out = run_once(binary, cfg);
    if (out.checksum != m.checksum)
      throw RunError("checksum changed between runs (" + m.checksum + " vs " + out.checksum + ")");
    m.samples.push_back(out.time_per_call);
  }
  return m;
}

CompilerBackend::CompilerBackend(LabelerConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (cfg_.work_dir.empty()) {
    std::string pattern = (fs::temp_directory_path() / "agile-label-XXXXXX").string();
    if (!::mkdtemp(pattern.data())) throw std::runtime_error("cannot create a labeling work directory");
    work_dir_ = pattern;
    owns_work_dir_ = true;
  } else {
    work_dir_ = cfg_.work_dir;
    fs::create_directories(work_dir_);
  }
}

CompilerBackend::~CompilerBackend() {
  if (owns_work_dir_) {
    std::error_code ec;
    fs::remove_all(work_dir_, ec);
  }
}

void CompilerBackend::begin(std::size_t count) {
  binaries_.assign(count, {});
  checksums_.assign(count, {});
}

void CompilerBackend::prepare(std::size_t index, const LabelTarget& target) {
  const Driver driver = synthesize_driver(target.fn, cfg_);
  const std::string stem = std::to_string(index) + "_" + target.fn.name;
  const fs::path source = work_dir_ / (stem + ".c");
  {
    std::ofstream out(source);
    out << driver.source;
    if (!out) throw std::runtime_error("cannot write " + source.string());
  }
  Binaries b{work_dir_ / (stem + "_basic"), work_dir_ / (stem + "_aggr")};
  compile_variant(source, cfg_.flags_basic, b.basic, cfg_);
  compile_variant(source, cfg_.flags_aggr, b.aggr, cfg_);
  binaries_.at(index) = b;
}

TimingRecord CompilerBackend::measure(std::size_t index, const LabelTarget&) {
  const auto& b = binaries_.at(index);
  if (b.basic.empty()) throw std::logic_error("measure before prepare");
  const auto basic = labeler::measure(b.basic, cfg_);
  const auto aggr = labeler::measure(b.aggr, cfg_);
  if (basic.checksum != aggr.checksum)
    throw RunError("checksum mismatch between optimization levels (" + basic.checksum + " vs " +
                   aggr.checksum + ")");
  checksums_.at(index) = basic.checksum;
  return TimingRecord::from_samples(basic.samples, aggr.samples);
}

FakeTimerBackend::FakeTimerBackend(std::map<std::string, std::pair<double, double>> times,
                                   std::map<std::string, std::string> failures, int repetitions)
    : times_(std::move(times)), failures_(std::move(failures)), repetitions_(repetitions) {
  if (repetitions_ < 1 || repetitions_ % 2 == 0)
    throw std::invalid_argument("fake timer: repetitions must be a positive odd number");
}

FakeTimerBackend FakeTimerBackend::from_table(const std::string& text, int repetitions) {
  std::map<std::string, std::pair<double, double>> times;
  std::map<std::string, std::string> failures;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string id, a;
    fields >> id >> a;
    if (a == "fail") {
      std::string reason;
      std::getline(fields >> std::ws, reason);
      failures[id] = reason.empty() ? "simulated failure" : reason;
      continue;
    }
    double tb = 0.0, ta = 0.0;
    std::istringstream nums(a);
    std::string rest;
    if (!(nums >> tb) || !nums.eof() || !(fields >> ta) || (fields >> rest))
      throw std::invalid_argument("fake timer table line " + std::to_string(line_no) +
                                  ": expected 'function_id t_basic t_aggr'");
    if (!(tb > 0.0 && ta > 0.0) || !std::isfinite(tb) || !std::isfinite(ta))
      throw std::invalid_argument("fake timer table line " + std::to_string(line_no) + ": times must be positive");
    times[id] = {tb, ta};
  }
  return FakeTimerBackend(std::move(times), std::move(failures), repetitions);
}

FakeTimerBackend FakeTimerBackend::from_file(const fs::path& path, int repetitions) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read fake timer table " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_table(buf.str(), repetitions);
}

TimingRecord FakeTimerBackend::measure(std::size_t, const LabelTarget& target) {
  if (auto f = failures_.find(target.function_id); f != failures_.end()) throw RunError(f->second);
  auto it = times_.find(target.function_id);
  if (it == times_.end()) throw RunError("no fake timing for '" + target.function_id + "'");
  const auto [tb, ta] = it->second;
  const auto reps = static_cast<std::size_t>(repetitions_);
  return TimingRecord::from_samples(std::vector<double>(reps, tb), std::vector<double>(reps, ta));
}

LabelingResult label_corpus(std::span<const LabelTarget> targets, const LabelerConfig& cfg,
                            MeasurementBackend& backend) {
  cfg.validate();
  if (targets.empty()) throw std::invalid_argument("label_corpus: no functions to label");
  backend.begin(targets.size());
  std::vector<std::string> failure(targets.size());
  parallel_for(targets.size(), std::max(1u, cfg.jobs), [&](std::size_t i) {
    try {
      backend.prepare(i, targets[i]);
    } catch (const std::exception& e) {
      failure[i] = e.what();
    }
  });

  LabelingResult result;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& id = targets[i].function_id;
    if (!failure[i].empty()) {
      result.quarantined.push_back({id, failure[i]});
      continue;
    }
    try {
      TimingRecord timing = backend.measure(i, targets[i]);
      const Label label = label_from_ratio(timing.t_basic, timing.t_aggr, cfg.delta);
      result.labeled.push_back({id, std::move(timing), label});
    } catch (const std::exception& e) {
      result.quarantined.push_back({id, e.what()});
    }
  }
  return result;
}

} // namespace agile::labeler
