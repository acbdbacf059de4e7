#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "satgym/backend.hpp"
#include "satgym/clause.hpp"
#include "satgym/tptp.hpp"

namespace satgym {

inline constexpr std::size_t kDefaultMaxClauses = 1000;

// Extra per-step information. Always empty by default.
using Info = std::map<std::string, std::string>;

struct EnvConfig {
  std::size_t max_clauses = kDefaultMaxClauses;
  // Unset: the bundled group theory task.
  std::optional<std::filesystem::path> problem_path;
  bool verbose_render = true;
  ProblemOptions problem_options;
};

struct ProofState {
  std::vector<ClausePtr> clauses;
  // selectable[i]: clause i may still be chosen as the given clause.
  std::vector<bool> selectable;
  std::size_t step_count = 0;
};

struct Observation {
  std::vector<ClausePtr> real_obs;
  // Length max_clauses; 1.0 exactly at selectable clause indices.
  std::vector<double> action_mask;
};

template <class Obs>
struct Outcome {
  Obs observation;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
  Info info;
};

using StepOutcome = Outcome<Observation>;

enum class RenderMode { kHuman, kAnsi };

RenderMode parse_render_mode(const std::string& mode);

// The bundled "idempotent element equals the identity" problem.
const Problem& default_problem();

// Given-clause saturation as an RL environment: the action is the index of
// the next given clause in `real_obs`.
//
// Not thread-safe; one instance per task. Distinct instances are
// independent.
class Environment {
 public:
  using ObservationType = Observation;
  using ActionType = std::size_t;

  explicit Environment(EnvConfig config = {},
                       std::unique_ptr<Backend> backend = nullptr);
  ~Environment();

  Environment(const Environment&) = delete;
  Environment& operator=(const Environment&) = delete;

  // Loads and validates the problem now; later resets use it. On failure
  // the previous task is kept.
  void set_task(const std::filesystem::path& problem_path);

  std::pair<Observation, Info> reset(std::optional<std::uint64_t> seed = {});
  StepOutcome step(std::size_t action);

  // kAnsi returns the proof state as cnf lines; kHuman writes the same bytes
  // to `out` and returns nothing.
  std::optional<std::string> render(RenderMode mode, std::ostream* out = nullptr) const;

  void close();

  Observation observation() const;
  const ProofState& state() const { return state_; }
  const EnvConfig& config() const { return config_; }
  const Problem& task() const;
  const Backend& backend() const { return *backend_; }
  std::size_t max_clauses() const { return config_.max_clauses; }
  std::optional<std::uint64_t> seed() const { return seed_; }

  Environment& unwrapped() { return *this; }
  const Environment& unwrapped() const { return *this; }

  bool has_been_reset() const { return reset_; }
  bool episode_over() const { return finished_; }
  bool has_empty_clause() const { return has_empty_; }
  bool has_selectable() const { return live_count_ > 0; }

 private:
  void append(const Clause& clause);
  void mark_unselectable(std::size_t index);

  EnvConfig config_;
  std::unique_ptr<Backend> backend_;
  std::optional<Problem> task_;
  std::optional<std::uint64_t> seed_;
  ProofState state_;
  std::unordered_map<std::string, std::size_t> label_index_;
  std::size_t live_count_ = 0;
  bool has_empty_ = false;
  bool reset_ = false;
  bool finished_ = false;
};

}  // namespace satgym
