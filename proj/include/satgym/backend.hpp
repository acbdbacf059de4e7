#pragma once

#include <string>
#include <vector>

#include "satgym/clause.hpp"
#include "satgym/tptp.hpp"

namespace satgym {

enum class ProverStatus { kRunning, kRefutation, kSaturated };

const char* to_string(ProverStatus status);

// Reply of a backend to one given-clause selection.
struct SelectResult {
  std::vector<Clause> new_clauses;
  std::vector<std::string> eliminated_labels;
  ProverStatus status = ProverStatus::kRunning;
};

// A saturation prover driven one given clause at a time. `start` loads the
// problem and returns the initial proof state; `select` processes the clause
// with the given label. One instance serves one environment.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string name() const = 0;
  virtual std::vector<Clause> start(const Problem& problem) = 0;
  virtual SelectResult select(const std::string& label) = 0;
  // Releases external resources. Called on environment close; start() may
  // follow again.
  virtual void stop() {}
};

}  // namespace satgym
