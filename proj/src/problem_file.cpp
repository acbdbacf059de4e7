#include "satgym/problem_file.hpp"

#include <unistd.h>

#include <atomic>
#include <fstream>

#include "satgym/error.hpp"

namespace satgym {

ProblemFile::ProblemFile(const Problem& problem) : path_(problem.path) {
  if (!path_.empty()) return;
  static std::atomic<unsigned> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("satgym-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + ".p");
  std::ofstream out(path_);
  for (const auto& clause : problem.clauses) out << render_clause(clause, true) << '\n';
  if (!out) throw TaskError("cannot write " + path_.string());
  temporary_ = true;
}

ProblemFile::~ProblemFile() {
  if (!temporary_) return;
  std::error_code ignored;
  std::filesystem::remove(path_, ignored);
}

}  // namespace satgym
