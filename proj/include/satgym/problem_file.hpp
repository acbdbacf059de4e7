#pragma once

#include <filesystem>

#include "satgym/tptp.hpp"

namespace satgym {

// A problem as a file on disk, for handing to an external prover. Problems
// loaded from a file reuse it; in-memory problems are written to a
// temporary file that is removed on destruction.
class ProblemFile {
 public:
  explicit ProblemFile(const Problem& problem);
  ~ProblemFile();

  ProblemFile(const ProblemFile&) = delete;
  ProblemFile& operator=(const ProblemFile&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  bool temporary_ = false;
};

}  // namespace satgym
