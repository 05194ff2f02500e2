#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace agile::labeler {

struct ProcessOptions {
  double timeout_s = 0.0;  // <= 0 waits forever
  std::filesystem::path cwd;  // empty keeps the current directory
};

struct ProcessResult {
  int exit_code = -1;   // -1 unless the child exited normally
  int signal = 0;       // terminating signal, 0 if none
  bool timed_out = false;
  std::string out;
  std::string err;
  double wall_s = 0.0;

  bool ok() const { return !timed_out && signal == 0 && exit_code == 0; }
};

/// The program could not be started at all (fork/pipe failure, missing
/// executable).
class SpawnError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs argv[0] (PATH lookup) with argv, capturing stdout and stderr. The
/// child gets its own process group; on timeout the whole group is killed.
ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options = {});

} // namespace agile::labeler
