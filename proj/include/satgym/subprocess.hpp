#pragma once

#include <sys/types.h>

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "satgym/line_io.hpp"

namespace satgym {

// A child process with a pipe on its standard input and, unless
// `capture_output` is false, on its standard output. Otherwise the child's
// output goes to our standard error. Standard error is inherited.
class Subprocess {
 public:
  // argv[0] is looked up on PATH when it has no slash. Throws Error naming
  // the executable when it cannot be started.
  explicit Subprocess(const std::vector<std::string>& argv, bool capture_output = true);
  ~Subprocess();

  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  // False when the child no longer reads its input.
  bool write_line(const std::string& line);
  std::optional<std::string> read_line(
      std::optional<std::chrono::milliseconds> timeout = std::nullopt);

  // Closes the child's input, waits up to `grace`, then kills it. Returns the
  // exit status as reported by waitpid. Idempotent.
  int terminate(std::chrono::milliseconds grace = std::chrono::milliseconds(200));

  pid_t pid() const { return pid_; }

 private:
  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  std::unique_ptr<LineReader> reader_;
  std::optional<int> status_;
};

// Copies `command`, replacing every occurrence of each key of `values`
// (such as "{problem}") inside each argument.
std::vector<std::string> expand_command(const std::vector<std::string>& command,
                                        const std::map<std::string, std::string>& values);

}  // namespace satgym
