#include "satgym/runner.hpp"

#include <algorithm>
#include <deque>
#include <ostream>

#include "satgym/relay.hpp"
#include "satgym/stdio_adapter.hpp"
#include "satgym/wrappers.hpp"

namespace satgym {

using json = nlohmann::json;

std::string to_string(EndCause cause) {
  switch (cause) {
    case EndCause::kTerminatedRefutation:
      return "terminated-refutation";
    case EndCause::kTerminatedExhausted:
      return "terminated-exhausted";
    case EndCause::kTruncatedClauses:
      return "truncated-clauses";
    case EndCause::kTruncatedSteps:
      return "truncated-steps";
    case EndCause::kAborted:
      return "aborted";
  }
  return "unknown";
}

std::uint64_t episode_seed(std::uint64_t master_seed, std::size_t index) {
  std::uint64_t z = master_seed + (static_cast<std::uint64_t>(index) + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

EpisodeRecord run_episode(Environment& env, Agent& agent, std::uint64_t seed,
                          std::size_t index, std::size_t max_steps) {
  const auto started = std::chrono::steady_clock::now();
  EpisodeRecord record;
  record.index = index;
  record.seed = seed;
  std::array<std::size_t, 2> counts{};

  env.reset(seed);
  agent.begin_episode(seed);
  try {
    while (true) {
      const Observation observation = env.observation();
      std::size_t action = agent.act(observation);
      if (agent.uses_arms()) {
        const int arm = static_cast<int>(std::min<std::size_t>(action, 2));
        action = bandit_map_action(observation, arm);
        ++counts[static_cast<std::size_t>(arm)];
      }
      const StepOutcome outcome = env.step(action);
      ++record.steps;
      record.reward = outcome.reward;
      if (outcome.terminated) {
        record.end_cause = outcome.reward == 1.0 || env.has_empty_clause()
                               ? EndCause::kTerminatedRefutation
                               : EndCause::kTerminatedExhausted;
        break;
      }
      if (outcome.truncated) {
        record.end_cause = EndCause::kTruncatedClauses;
        break;
      }
      if (max_steps != 0 && record.steps >= max_steps) {
        record.end_cause = EndCause::kTruncatedSteps;
        break;
      }
    }
    agent.end_episode(record.reward);
  } catch (const InvalidActionError& error) {
    record.end_cause = EndCause::kAborted;
    record.reward = 0.0;
    record.error = error.what();
  }
  if (agent.uses_arms()) record.arm_counts = counts;
  record.duration = std::chrono::steady_clock::now() - started;
  return record;
}

std::unique_ptr<Backend> make_backend(const BackendSpec& spec) {
  if (spec.kind == "embedded") return nullptr;
  if (spec.kind == "stdio") {
    if (spec.prover_command.empty()) {
      throw ValidationError("the stdio backend needs a prover command");
    }
    StdioAdapterConfig config;
    config.executable_path = spec.prover_command.front();
    config.argument_template.assign(spec.prover_command.begin() + 1, spec.prover_command.end());
    config.read_timeout = spec.timeout;
    return std::make_unique<StdioAdapter>(std::move(config));
  }
  if (spec.kind == "relay") {
    RelayBackendConfig config;
    config.server.host = spec.relay_host;
    config.server.port = spec.relay_port;
    config.read_timeout = spec.timeout;
    config.prover_command = spec.prover_command;
    return std::make_unique<RelayBackend>(std::move(config));
  }
  throw ValidationError("unknown backend '" + spec.kind + "' (expected embedded, stdio or relay)");
}

namespace {

std::string resolved_wrapper(const ExperimentConfig& config) {
  if (!config.wrapper.empty()) return config.wrapper;
  return config.agent == "thompson" ? "bandit" : "none";
}

double mean(const std::deque<double>& values) {
  if (values.empty()) return 0.0;
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

}  // namespace

void validate(const ExperimentConfig& config) {
  if (config.agent != "random" && config.agent != "thompson") {
    throw ValidationError("unknown agent '" + config.agent + "' (expected random or thompson)");
  }
  const std::string wrapper = resolved_wrapper(config);
  if (wrapper != "none" && wrapper != "bandit") {
    throw ValidationError("unknown wrapper '" + wrapper + "' (expected none or bandit)");
  }
  if (config.agent == "thompson" && wrapper != "bandit") {
    throw ValidationError("the thompson agent needs --wrapper bandit");
  }
  const auto& kind = config.backend.kind;
  if (kind != "embedded" && kind != "stdio" && kind != "relay") {
    throw ValidationError("unknown backend '" + kind + "' (expected embedded, stdio or relay)");
  }
  if (kind == "stdio" && config.backend.prover_command.empty()) {
    throw ValidationError("the stdio backend needs a prover command");
  }
  if (config.max_clauses == 0) throw ValidationError("max_clauses must be positive");
  if (config.window == 0) throw ValidationError("the reward window must be positive");
  if (config.problem) {
    try {
      load_problem(*config.problem);
    } catch (const Error& error) {
      throw ValidationError("cannot load problem " + config.problem->string() + ": " +
                            error.what());
    }
  }
}

json episode_json(const EpisodeRecord& record) {
  json line = {{"record", "episode"},
               {"episode", record.index},
               {"seed", record.seed},
               {"steps", record.steps},
               {"reward", record.reward},
               {"end_cause", to_string(record.end_cause)}};
  if (record.arm_counts) {
    line["arm_counts"] = {{"age", (*record.arm_counts)[kAgeArm]},
                          {"weight", (*record.arm_counts)[kWeightArm]}};
  }
  if (!record.error.empty()) line["error"] = record.error;
  return line;
}

ExperimentSummary run_experiment(const ExperimentConfig& config, std::ostream& out) {
  validate(config);
  const std::string wrapper = resolved_wrapper(config);

  EnvConfig env_config;
  env_config.max_clauses = config.max_clauses;
  env_config.problem_path = config.problem;
  Environment env(env_config, make_backend(config.backend));
  auto agent = make_agent(config.agent, wrapper == "bandit");

  out << json{{"record", "config"},
              {"agent", config.agent},
              {"backend", config.backend.kind},
              {"problem", config.problem ? config.problem->string() : std::string("bundled")},
              {"max_clauses", config.max_clauses},
              {"episodes", config.episodes},
              {"seed", config.seed},
              {"wrapper", wrapper},
              {"max_steps", config.max_steps},
              {"window", config.window}}
             .dump()
      << '\n';

  ExperimentSummary summary;
  double reward_total = 0.0;
  std::deque<double> window;
  for (std::size_t i = 0; i < config.episodes; ++i) {
    EpisodeRecord record =
        run_episode(env, *agent, episode_seed(config.seed, i), i, config.max_steps);
    summary.total_steps += record.steps;
    reward_total += record.reward;
    window.push_back(record.reward);
    if (window.size() > config.window) window.pop_front();

    json line = episode_json(record);
    line["cumulative_steps"] = summary.total_steps;
    line["mean_reward"] = reward_total / static_cast<double>(i + 1);
    line["window_mean_reward"] = mean(window);
    out << line.dump() << '\n';
    summary.records.push_back(std::move(record));
  }
  env.close();

  summary.episodes = config.episodes;
  summary.mean_reward =
      config.episodes == 0 ? 0.0 : reward_total / static_cast<double>(config.episodes);
  summary.window_mean_reward = mean(window);
  out << json{{"record", "summary"},
              {"episodes", summary.episodes},
              {"total_steps", summary.total_steps},
              {"mean_reward", summary.mean_reward},
              {"window_mean_reward", summary.window_mean_reward}}
             .dump()
      << '\n';
  out.flush();
  return summary;
}

}  // namespace satgym
