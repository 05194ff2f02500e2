#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <random>
#include <thread>

#include "agile/labeler/driver.hpp"
#include "agile/labeler/labeler.hpp"
#include "agile/labeler/process.hpp"
#include "agile/parser/parser.hpp"
#include "test_support.hpp"

namespace agile::labeler {
namespace {

constexpr Label E = Label::Easy;
constexpr Label H = Label::Hard;

parser::FunctionUnit floyd() {
  return parser::parse_function(test::read_text(test::data_path("floyd_warshall.c")));
}

TEST(LabelFromRatio, Examples) {
  EXPECT_EQ(label_from_ratio(10.0, 9.0, 0.8), E);
  EXPECT_EQ(label_from_ratio(10.0, 5.0, 0.8), H);
  EXPECT_EQ(label_from_ratio(10.0, 8.0, 0.8), H);
  EXPECT_EQ(label_from_ratio(1.0, 1.0, 1.0), H);
  EXPECT_EQ(label_from_ratio(1.0, 1.5, 1.0), E);
}

TEST(LabelFromRatio, RejectsBadInput) {
  EXPECT_THROW(label_from_ratio(0.0, 1.0, 0.8), std::invalid_argument);
  EXPECT_THROW(label_from_ratio(1.0, -1.0, 0.8), std::invalid_argument);
  EXPECT_THROW(label_from_ratio(1.0, 1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(label_from_ratio(1.0, 1.0, 1.01), std::invalid_argument);
  EXPECT_THROW(label_from_ratio(std::nan(""), 1.0, 0.8), std::invalid_argument);
}

TEST(LabelFromRatio, MonotoneInAggressiveTime) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> t(0.01, 10.0), d(0.05, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double basic = t(rng), delta = d(rng);
    double aggr = t(rng);
    Label prev = label_from_ratio(basic, aggr, delta);
    for (int step = 0; step < 8; ++step) {
      aggr *= 0.8;
      const Label now = label_from_ratio(basic, aggr, delta);
      EXPECT_FALSE(prev == H && now == E);
      prev = now;
    }
  }
}

TEST(MedianOfOdd, MatchesSortAndPick) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> s(1 + 2 * (rng() % 10));
    for (auto& v : s) v = u(rng) < 0.2 ? 0.5 : u(rng);
    auto sorted = s;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(median_of_odd(s), sorted[sorted.size() / 2]);
  }
  EXPECT_THROW(median_of_odd({}), std::invalid_argument);
  EXPECT_THROW(median_of_odd({1.0, 2.0}), std::invalid_argument);
}

TEST(TimingRecord, RatioOfMedians) {
  const auto t = TimingRecord::from_samples({3, 1, 2}, {0.5, 9, 1.5});
  EXPECT_EQ(t.t_basic, 2.0);
  EXPECT_EQ(t.t_aggr, 1.5);
  EXPECT_EQ(t.ratio, t.t_aggr / t.t_basic);
  EXPECT_EQ(t.samples_basic, (std::vector<double>{3, 1, 2}));
}

TEST(LabelerConfig, ValidationAndJson) {
  LabelerConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.delta, 0.8);
  EXPECT_EQ(cfg.flags_basic, std::vector<std::string>{"-O1"});
  EXPECT_EQ(cfg.flags_aggr, std::vector<std::string>{"-O3"});
  EXPECT_EQ(cfg.repetitions, 7);
  EXPECT_EQ(cfg.array_extent, 512);
  auto bad = cfg;
  bad.repetitions = 4;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.delta = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.compiler_cmd = "cc -o out.bin";
  EXPECT_THROW(bad.validate(), std::invalid_argument);

  const auto j = Json::parse(R"({"delta": 0.7, "flags_aggr": "-O3 -march=native", "repetitions": 5})");
  const auto parsed = LabelerConfig::from_json(j);
  EXPECT_EQ(parsed.delta, 0.7);
  EXPECT_EQ(parsed.flags_aggr, (std::vector<std::string>{"-O3", "-march=native"}));
  EXPECT_EQ(parsed.repetitions, 5);
  EXPECT_EQ(LabelerConfig::from_json(parsed.to_json()).hash(), parsed.hash());
  EXPECT_NE(parsed.hash(), cfg.hash());
  auto jobs = cfg;
  jobs.jobs = 8;
  EXPECT_EQ(jobs.hash(), cfg.hash());
  EXPECT_THROW(LabelerConfig::from_json(Json::parse(R"({"dleta": 0.7})")), std::invalid_argument);
  EXPECT_THROW(LabelerConfig::from_json(Json::parse(R"({"delta": 2})")), std::invalid_argument);
}

TEST(ExpandCommand, SubstitutesPlaceholders) {
  const auto argv = expand_command("cc -std=gnu99 {flags} -o {output} {source}", {"-O3", "-g"}, "a.c", "a.bin");
  EXPECT_EQ(argv, (std::vector<std::string>{"cc", "-std=gnu99", "-O3", "-g", "-o", "a.bin", "a.c"}));
  EXPECT_EQ(expand_command("gcc {flags} {source} -o{output}", {}, "s.c", "b"),
            (std::vector<std::string>{"gcc", "s.c", "-ob"}));
}

TEST(RunProcess, CapturesOutputAndStatus) {
  const auto r = run_process({"sh", "-c", "echo out; echo err >&2; exit 3"});
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_EQ(r.out, "out\n");
  EXPECT_EQ(r.err, "err\n");
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(run_process({"true"}).ok());
}

TEST(RunProcess, TimeoutKillsTheProcessGroup) {
  const auto r = run_process({"sh", "-c", "sleep 5 & sleep 5; echo late"}, ProcessOptions{.timeout_s = 0.3, .cwd = {}});
  EXPECT_TRUE(r.timed_out);
  EXPECT_LT(r.wall_s, 3.0);
  EXPECT_EQ(r.out, "");
}

TEST(RunProcess, MissingProgram) {
  EXPECT_THROW(run_process({"/nonexistent/agile-program"}), SpawnError);
  EXPECT_THROW(run_process({}), SpawnError);
}

TEST(RunProcess, LargeOutputDoesNotDeadlock) {
  const auto r = run_process({"sh", "-c", "head -c 300000 /dev/zero; head -c 300000 /dev/zero >&2"});
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.out.size(), 300000u);
  EXPECT_EQ(r.err.size(), 300000u);
}

TEST(Driver, FloydWarshallDriverShape) {
  LabelerConfig cfg;
  const auto d = synthesize_driver(floyd(), cfg);
  EXPECT_EQ(d.extent, 512);
  EXPECT_EQ(d.bound_symbols, std::vector<std::string>{"N"});
  EXPECT_TRUE(d.globals.empty());
  EXPECT_NE(d.source.find("enum { N = 512 };"), std::string::npos);
  EXPECT_NE(d.source.find("float drv_arg1[N + 8][N];"), std::string::npos);
  EXPECT_NE(d.source.find("checksum"), std::string::npos);
  EXPECT_EQ(d.source, synthesize_driver(floyd(), cfg).source);
  cfg.rng_seed = 2;
  EXPECT_NE(d.source, synthesize_driver(floyd(), cfg).source);
}

TEST(Driver, ExtentCoversLiteralLoopBounds) {
  LabelerConfig cfg;
  cfg.array_extent = 16;
  const auto d = synthesize_driver(
      parser::parse_function("void f(float a[N]) { int i; for (i = 0; i < 100; i++) a[i] = 1; }"), cfg);
  EXPECT_EQ(d.extent, 100);
}

TEST(Driver, FreeScalarsBecomeGlobals) {
  const auto d = synthesize_driver(parser::parse_function("void f(float a[N]) { s = s + a[0]; t = 2; }"),
                                   LabelerConfig{});
  EXPECT_EQ(d.globals, (std::vector<std::string>{"s", "t"}));
}

TEST(Driver, ReservedNamesAreRejected) {
  EXPECT_THROW(synthesize_driver(parser::parse_function("void main(int n) { n = 1; }"), LabelerConfig{}),
               DriverError);
  EXPECT_THROW(synthesize_driver(parser::parse_function("void f(int drv_x) { drv_x = 1; }"), LabelerConfig{}),
               DriverError);
}

TEST(Driver, OutputParsing) {
  const auto o = parse_driver_output("checksum 12.5\ncalls 64\ntime_per_call 0.00125\n");
  EXPECT_EQ(o.checksum, "12.5");
  EXPECT_EQ(o.calls, 64);
  EXPECT_EQ(o.time_per_call, 0.00125);
  EXPECT_THROW(parse_driver_output("checksum 1\ncalls 2\n"), RunError);
  EXPECT_THROW(parse_driver_output("checksum 1\ncalls 2\ntime_per_call 0\n"), RunError);
  EXPECT_THROW(parse_driver_output(""), RunError);
}

std::vector<LabelTarget> targets(std::initializer_list<const char*> ids) {
  std::vector<LabelTarget> out;
  for (const char* id : ids) out.push_back({id, parser::parse_function(std::string("void ") + id + "(float a[N]) { a[0] = 1; }")});
  return out;
}

TEST(FakeTimer, LabelsFromTable) {
  auto backend = FakeTimerBackend::from_table(
      "# id basic aggr\n"
      "fa 10 9\n"
      "fb 10.0 5.0\n"
      "fc 10 8\n"
      "fd fail compiler crashed\n",
      3);
  LabelerConfig cfg;
  const auto t = targets({"fa", "fb", "fc", "fd", "fe"});
  const auto r = label_corpus(t, cfg, backend);
  ASSERT_EQ(r.labeled.size(), 3u);
  EXPECT_EQ(r.labeled[0].function_id, "fa");
  EXPECT_EQ(r.labeled[0].label, E);
  EXPECT_EQ(r.labeled[0].timing.ratio, 0.9);
  EXPECT_EQ(r.labeled[0].timing.samples_basic, (std::vector<double>{10, 10, 10}));
  EXPECT_EQ(r.labeled[1].label, H);
  EXPECT_EQ(r.labeled[2].label, H);
  ASSERT_EQ(r.quarantined.size(), 2u);
  EXPECT_EQ(r.quarantined[0].function_id, "fd");
  EXPECT_NE(r.quarantined[0].reason.find("compiler crashed"), std::string::npos);
  EXPECT_EQ(r.quarantined[1].function_id, "fe");
  EXPECT_EQ(r.exit_code(), 2);
}

TEST(FakeTimer, DeltaIsApplied) {
  auto backend = FakeTimerBackend::from_table("fa 10 9\n", 1);
  LabelerConfig cfg;
  cfg.delta = 0.95;
  EXPECT_EQ(label_corpus(targets({"fa"}), cfg, backend).labeled.at(0).label, H);
}

TEST(FakeTimer, MalformedTable) {
  EXPECT_THROW(FakeTimerBackend::from_table("fa 10\n", 1), std::invalid_argument);
  EXPECT_THROW(FakeTimerBackend::from_table("fa ten 9\n", 1), std::invalid_argument);
  EXPECT_THROW(FakeTimerBackend::from_table("fa 0 9\n", 1), std::invalid_argument);
  EXPECT_THROW(FakeTimerBackend::from_table("fa 1 1\n", 2), std::invalid_argument);
}

// Records call order and overlap to check the concurrency contract.
class ProbeBackend : public MeasurementBackend {
 public:
  void prepare(std::size_t, const LabelTarget&) override {
    const int now = ++preparing_;
    int seen = max_preparing_.load();
    while (now > seen && !max_preparing_.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    --preparing_;
  }
  TimingRecord measure(std::size_t index, const LabelTarget& target) override {
    EXPECT_EQ(++measuring_, 1);
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
    {
      std::lock_guard lock(mutex_);
      order_.push_back(index);
    }
    --measuring_;
    if (target.function_id == "f3") throw TimeoutError("too slow");
    return TimingRecord::from_samples({2.0}, {1.0 + static_cast<double>(index % 2)});
  }
  std::vector<std::size_t> order_;
  std::atomic<int> max_preparing_{0};

 private:
  std::atomic<int> preparing_{0};
  std::atomic<int> measuring_{0};
  std::mutex mutex_;
};

TEST(LabelCorpus, PreparesConcurrentlyAndMeasuresInOrder) {
  std::vector<LabelTarget> t;
  for (int i = 0; i < 12; ++i) t.push_back({"f" + std::to_string(i), parser::parse_function("void f(){}")});
  LabelerConfig cfg;
  cfg.jobs = 4;
  ProbeBackend probe;
  const auto r = label_corpus(t, cfg, probe);
  std::vector<std::size_t> expected(12);
  for (std::size_t i = 0; i < 12; ++i) expected[i] = i;
  EXPECT_EQ(probe.order_, expected);
  EXPECT_GT(probe.max_preparing_.load(), 1);
  EXPECT_LE(probe.max_preparing_.load(), 4);
  ASSERT_EQ(r.quarantined.size(), 1u);
  EXPECT_EQ(r.quarantined[0].function_id, "f3");
  EXPECT_EQ(r.labeled.size(), 11u);
  EXPECT_EQ(r.labeled[0].label, H);  // 1/2
  EXPECT_EQ(r.labeled[1].label, E);  // 2/2
  EXPECT_THROW(label_corpus({}, cfg, probe), std::invalid_argument);
}

// The remaining tests need a C compiler.
class RealCompiler : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!test::compiler_available()) GTEST_SKIP() << "no C compiler";
    cfg_.array_extent = 64;
    cfg_.repetitions = 3;
    cfg_.min_runtime_s = 0.01;
    cfg_.timeout_s = 30;
    cfg_.work_dir = dir_.path();
  }
  std::string build_and_measure(const parser::FunctionUnit& fn, const std::vector<std::string>& flags,
                                const LabelerConfig& cfg, const std::string& stem) {
    test::write_text(dir_ / (stem + ".c"), synthesize_driver(fn, cfg).source);
    compile_variant(dir_ / (stem + ".c"), flags, dir_ / stem, cfg);
    const auto m = measure(dir_ / stem, cfg);
    EXPECT_EQ(m.samples.size(), static_cast<std::size_t>(cfg.repetitions));
    for (double s : m.samples) EXPECT_GT(s, 0.0);
    return m.checksum;
  }
  test::TempDir dir_;
  LabelerConfig cfg_;
};

TEST_F(RealCompiler, FloydWarshallChecksumsAgreeAcrossLevels) {
  const auto basic = build_and_measure(floyd(), cfg_.flags_basic, cfg_, "fw_basic");
  const auto aggr = build_and_measure(floyd(), cfg_.flags_aggr, cfg_, "fw_aggr");
  EXPECT_EQ(basic, aggr);
  EXPECT_NE(basic, "0");
}

TEST_F(RealCompiler, FunctionWithoutOutputsHasZeroChecksum) {
  const auto fn = parser::parse_function("void f(float a[N]) { int i; for (i = 0; i < N; i++) ; }");
  EXPECT_EQ(build_and_measure(fn, {"-O1"}, cfg_, "noop"), "0");
}

TEST_F(RealCompiler, SeedChangesTheChecksum) {
  auto other = cfg_;
  other.rng_seed = cfg_.rng_seed + 1;
  EXPECT_NE(build_and_measure(floyd(), {"-O1"}, cfg_, "s1"), build_and_measure(floyd(), {"-O1"}, other, "s2"));
}

TEST_F(RealCompiler, BrokenSourceIsACompileError) {
  test::write_text(dir_ / "broken.c", "int main(void) { return }\n");
  try {
    compile_variant(dir_ / "broken.c", {"-O1"}, dir_ / "broken", cfg_);
    FAIL() << "expected CompileError";
  } catch (const CompileError& e) {
    EXPECT_FALSE(e.diagnostics().empty());
  }
}

TEST_F(RealCompiler, HangingBinaryTimesOut) {
  test::write_text(dir_ / "hang.c", "int main(void) { volatile int x = 1; while (x) { } return 0; }\n");
  compile_variant(dir_ / "hang.c", {"-O1"}, dir_ / "hang", cfg_);
  auto cfg = cfg_;
  cfg.timeout_s = 0.3;
  EXPECT_THROW(measure(dir_ / "hang", cfg), TimeoutError);
}

TEST_F(RealCompiler, CorpusWithACompileFailure) {
  // puts clashes with the declaration in <stdio.h>, which the driver includes.
  std::vector<LabelTarget> t{{"floyd_warshall", floyd()},
                             {"puts", parser::parse_function("void puts(float a[N]) { a[0] = 1; }")}};
  CompilerBackend backend(cfg_);
  const auto r = label_corpus(t, cfg_, backend);
  ASSERT_EQ(r.labeled.size(), 1u);
  EXPECT_EQ(r.labeled[0].function_id, "floyd_warshall");
  EXPECT_GT(r.labeled[0].timing.ratio, 0.0);
  EXPECT_TRUE(std::isfinite(r.labeled[0].timing.ratio));
  EXPECT_EQ(r.labeled[0].timing.ratio, r.labeled[0].timing.t_aggr / r.labeled[0].timing.t_basic);
  EXPECT_FALSE(backend.checksum(0).empty());
  ASSERT_EQ(r.quarantined.size(), 1u);
  EXPECT_EQ(r.quarantined[0].function_id, "puts");
  EXPECT_EQ(r.exit_code(), 2);
}

} // namespace
} // namespace agile::labeler
