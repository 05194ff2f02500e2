#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "agile/common/json_io.hpp"
#include "agile/common/label.hpp"
#include "agile/parser/ast.hpp"

namespace agile::labeler {

struct LabelerConfig {
  double delta = 0.8;
  // Split on whitespace, no shell. {flags} expands to the flag list.
  std::string compiler_cmd = "cc -std=gnu99 -ffp-contract=off {flags} -o {output} {source}";
  std::vector<std::string> flags_basic{"-O1"};
  std::vector<std::string> flags_aggr{"-O3"};
  int repetitions = 7;
  double timeout_s = 60.0;
  double min_runtime_s = 0.2;
  int array_extent = 512;
  std::uint64_t rng_seed = 1;
  unsigned jobs = 1;              // concurrent compilations
  std::filesystem::path work_dir; // empty: a fresh directory under the system temp dir

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
  /// Fields that affect labels, in fixed order (no jobs or work_dir).
  Json to_json() const;
  static LabelerConfig from_json(const Json& j);
  /// Digest of to_json().
  std::string hash() const;
};

/// Easy iff t_aggr / t_basic > delta. Throws std::invalid_argument for
/// nonpositive times or delta outside (0, 1].
Label label_from_ratio(double t_basic, double t_aggr, double delta);

/// Middle element of an odd-sized sample. Throws on empty or even input.
double median_of_odd(std::vector<double> samples);

struct TimingRecord {
  double t_basic = 0.0;
  double t_aggr = 0.0;
  double ratio = 0.0;
  std::vector<double> samples_basic;
  std::vector<double> samples_aggr;

  /// Medians and ratio from raw samples.
  static TimingRecord from_samples(std::vector<double> basic, std::vector<double> aggr);
};

class CompileError : public std::runtime_error {
 public:
  CompileError(const std::string& what, std::string diagnostics)
      : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}
  const std::string& diagnostics() const { return diagnostics_; }

 private:
  std::string diagnostics_;
};

class TimeoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Nonzero exit, crash, malformed output or checksum disagreement.
class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Substitutes {source}, {output} and {flags} into the command template.
std::vector<std::string> expand_command(const std::string& command_template,
                                        const std::vector<std::string>& flags,
                                        const std::filesystem::path& source,
                                        const std::filesystem::path& output);

/// Compiles `source` into `output`. Throws CompileError or TimeoutError.
void compile_variant(const std::filesystem::path& source, const std::vector<std::string>& flags,
                     const std::filesystem::path& output, const LabelerConfig& cfg);

struct Measurement {
  std::vector<double> samples;  // per-call seconds, one per repetition
  std::string checksum;
};

/// One untimed warmup run, then cfg.repetitions runs. Runs hold a process-wide
/// lock, so no two measured binaries execute at once. Throws TimeoutError or
/// RunError; differing checksums between runs are a RunError.
Measurement measure(const std::filesystem::path& binary, const LabelerConfig& cfg);

struct LabelTarget {
  std::string function_id;
  parser::FunctionUnit fn;
};

struct LabeledFunction {
  std::string function_id;
  TimingRecord timing;
  Label label = Label::Hard;
};

struct Quarantine {
  std::string function_id;
  std::string reason;
};

struct LabelingResult {
  std::vector<LabeledFunction> labeled;  // manifest order
  std::vector<Quarantine> quarantined;   // manifest order

  /// 0 when everything was labeled, 2 when something was quarantined.
  int exit_code() const { return quarantined.empty() ? 0 : 2; }
};

/// Source of per-function timings. prepare() may run concurrently for
/// distinct indices; measure() is called serially in target order. Any
/// exception quarantines the function with its message as the reason.
class MeasurementBackend {
 public:
  virtual ~MeasurementBackend() = default;
  virtual void begin(std::size_t /*count*/) {}
  virtual void prepare(std::size_t /*index*/, const LabelTarget& /*target*/) {}
  virtual TimingRecord measure(std::size_t index, const LabelTarget& target) = 0;
};

/// Synthesizes a driver, compiles it at both levels and times the binaries.
class CompilerBackend : public MeasurementBackend {
 public:
  explicit CompilerBackend(LabelerConfig cfg);
  ~CompilerBackend() override;
  void begin(std::size_t count) override;
  void prepare(std::size_t index, const LabelTarget& target) override;
  TimingRecord measure(std::size_t index, const LabelTarget& target) override;

  const std::filesystem::path& work_dir() const { return work_dir_; }
  /// Checksum both variants agreed on, by target index; empty if unmeasured.
  const std::string& checksum(std::size_t index) const { return checksums_.at(index); }

 private:
  struct Binaries {
    std::filesystem::path basic;
    std::filesystem::path aggr;
  };
  LabelerConfig cfg_;
  std::filesystem::path work_dir_;
  bool owns_work_dir_ = false;
  std::vector<Binaries> binaries_;
  std::vector<std::string> checksums_;
};

/// Replays a table of "function_id t_basic t_aggr" lines; a line
/// "function_id fail <reason>" simulates a failure. Every repetition reports
/// the tabled time. Lines starting with '#' are comments.
class FakeTimerBackend : public MeasurementBackend {
 public:
  FakeTimerBackend(std::map<std::string, std::pair<double, double>> times,
                   std::map<std::string, std::string> failures, int repetitions);
  static FakeTimerBackend from_table(const std::string& text, int repetitions);
  static FakeTimerBackend from_file(const std::filesystem::path& path, int repetitions);

  TimingRecord measure(std::size_t index, const LabelTarget& target) override;

 private:
  std::map<std::string, std::pair<double, double>> times_;
  std::map<std::string, std::string> failures_;
  int repetitions_;
};

/// Prepares every target (cfg.jobs at a time), then measures and labels them
/// one by one in order. Individual failures become quarantine entries.
LabelingResult label_corpus(std::span<const LabelTarget> targets, const LabelerConfig& cfg,
                            MeasurementBackend& backend);

} // namespace agile::labeler
