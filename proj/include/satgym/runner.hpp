#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "satgym/agents.hpp"
#include "satgym/backend.hpp"
#include "satgym/environment.hpp"
#include "satgym/error.hpp"

namespace satgym {

enum class EndCause {
  kTerminatedRefutation,
  kTerminatedExhausted,
  kTruncatedClauses,
  kTruncatedSteps,
  // The agent chose a masked index or an arm with nothing to select.
  kAborted,
};

std::string to_string(EndCause cause);

struct EpisodeRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  double reward = 0.0;
  EndCause end_cause = EndCause::kTerminatedExhausted;
  // Steps per arm, only for agents that act on arms.
  std::optional<std::array<std::size_t, 2>> arm_counts;
  std::chrono::duration<double, std::milli> duration{0};
  // Set for kAborted.
  std::string error;
};

// Seed of episode `index` under `master_seed`: the splitmix64 output for
// state master_seed + (index + 1) * 0x9E3779B97F4A7C15.
std::uint64_t episode_seed(std::uint64_t master_seed, std::size_t index);

// Resets `env` with `seed`, reseeds the agent and steps until the episode
// ends or `max_steps` steps were taken (0: no limit). Arm agents go through
// BanditActions. The agent sees the terminal reward once.
EpisodeRecord run_episode(Environment& env, Agent& agent, std::uint64_t seed,
                          std::size_t index = 0, std::size_t max_steps = 0);

class ValidationError : public Error {
 public:
  using Error::Error;
};

struct BackendSpec {
  std::string kind = "embedded";  // embedded, stdio or relay
  // stdio: executable then arguments ("{problem}" substituted).
  // relay: optional prover launched per episode ("{problem}", "{host}",
  // "{port}" substituted).
  std::vector<std::string> prover_command;
  std::string relay_host = "127.0.0.1";
  std::uint16_t relay_port = 0;
  std::chrono::milliseconds timeout{10000};
};

// nullptr for the embedded backend. Throws ValidationError.
std::unique_ptr<Backend> make_backend(const BackendSpec& spec);

struct ExperimentConfig {
  std::string agent = "random";
  BackendSpec backend;
  std::optional<std::filesystem::path> problem;
  std::size_t max_clauses = kDefaultMaxClauses;
  std::size_t episodes = 1;
  std::uint64_t seed = 0;
  // none or bandit; empty picks bandit for thompson and none otherwise.
  std::string wrapper;
  std::size_t max_steps = 0;
  std::size_t window = 100;
};

// Throws ValidationError naming the offending setting. Checks that the
// problem file exists and parses.
void validate(const ExperimentConfig& config);

struct ExperimentSummary {
  std::size_t episodes = 0;
  std::size_t total_steps = 0;
  double mean_reward = 0.0;
  // Mean over the last `window` episodes.
  double window_mean_reward = 0.0;
  std::vector<EpisodeRecord> records;
};

// Validates, then runs the episodes in order and writes JSON lines to `out`:
// a "config" record, one "episode" record per episode carrying the running
// mean reward against cumulative steps, and a final "summary" record. Wall
// times are left out of the file so equal seeds give equal bytes.
ExperimentSummary run_experiment(const ExperimentConfig& config, std::ostream& out);

nlohmann::json episode_json(const EpisodeRecord& record);

}  // namespace satgym
