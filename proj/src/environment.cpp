#include "satgym/environment.hpp"

#include <iostream>
#include <sstream>

#include "satgym/embedded_prover.hpp"
#include "satgym/error.hpp"
#include "satgym/log.hpp"

namespace satgym {

namespace detail {
extern const char kDefaultProblemText[];
}  // namespace detail

RenderMode parse_render_mode(const std::string& mode) {
  if (mode == "human") return RenderMode::kHuman;
  if (mode == "ansi") return RenderMode::kAnsi;
  throw Error("unknown render mode '" + mode + "' (expected human or ansi)");
}

const Problem& default_problem() {
  static const Problem problem = parse_problem(detail::kDefaultProblemText);
  return problem;
}

Environment::Environment(EnvConfig config, std::unique_ptr<Backend> backend)
    : config_(std::move(config)), backend_(std::move(backend)) {
  if (config_.max_clauses == 0) throw Error("max_clauses must be positive");
  if (!backend_) backend_ = std::make_unique<EmbeddedProver>();
  if (config_.problem_path) set_task(*config_.problem_path);
}

Environment::~Environment() {
  try {
    close();
  } catch (...) {
  }
}

void Environment::set_task(const std::filesystem::path& problem_path) {
  Problem problem = load_problem(problem_path, config_.problem_options);
  task_ = std::move(problem);
  config_.problem_path = problem_path;
}

const Problem& Environment::task() const {
  return task_ ? *task_ : default_problem();
}

std::pair<Observation, Info> Environment::reset(std::optional<std::uint64_t> seed) {
  seed_ = seed;
  state_ = {};
  label_index_.clear();
  live_count_ = 0;
  has_empty_ = false;
  finished_ = false;
  reset_ = false;
  backend_->stop();
  for (const auto& clause : backend_->start(task())) append(clause.with_birth_step(0));
  reset_ = true;
  return {observation(), {}};
}

void Environment::append(const Clause& clause) {
  if (!label_index_.emplace(clause.label(), state_.clauses.size()).second) {
    throw ProtocolError("backend " + backend_->name() +
                        " reported clause label '" + clause.label() + "' twice");
  }
  has_empty_ = has_empty_ || clause.is_empty();
  state_.clauses.push_back(std::make_shared<const Clause>(clause));
  state_.selectable.push_back(true);
  ++live_count_;
}

void Environment::mark_unselectable(std::size_t index) {
  if (state_.selectable[index]) {
    state_.selectable[index] = false;
    --live_count_;
  }
}

StepOutcome Environment::step(std::size_t action) {
  if (!reset_) throw NotResetError("step() called before reset()");
  if (finished_) {
    throw EpisodeFinishedError("the episode is over; call reset() first");
  }
  if (action >= config_.max_clauses || action >= state_.clauses.size() ||
      !state_.selectable[action]) {
    throw InvalidActionError("action " + std::to_string(action) +
                             " is masked out (not an available given clause)");
  }

  SelectResult result;
  try {
    result = backend_->select(state_.clauses[action]->label());
  } catch (const BackendDisconnectedError& error) {
    log_error(std::string("episode aborted: ") + error.what());
    ++state_.step_count;
    mark_unselectable(action);
    finished_ = true;
    StepOutcome outcome;
    outcome.observation = observation();
    outcome.terminated = true;
    return outcome;
  }

  ++state_.step_count;
  mark_unselectable(action);
  const bool had_empty = has_empty_;
  for (const auto& clause : result.new_clauses) {
    append(clause.with_birth_step(state_.step_count));
  }
  for (const auto& label : result.eliminated_labels) {
    auto it = label_index_.find(label);
    if (it != label_index_.end()) mark_unselectable(it->second);
  }
  if (result.status == ProverStatus::kSaturated) {
    // The prover has nothing left to offer even if it did not say which
    // clauses it dropped.
    for (std::size_t i = 0; i < state_.clauses.size(); ++i) mark_unselectable(i);
  }

  StepOutcome outcome;
  outcome.reward = (!had_empty && has_empty_) ? 1.0 : 0.0;
  outcome.terminated = has_empty_ || live_count_ == 0;
  outcome.truncated =
      !outcome.terminated && state_.clauses.size() > config_.max_clauses;
  finished_ = outcome.terminated || outcome.truncated;
  outcome.observation = observation();
  return outcome;
}

Observation Environment::observation() const {
  Observation obs;
  obs.real_obs = state_.clauses;
  obs.action_mask.assign(config_.max_clauses, 0.0);
  const std::size_t limit = std::min(config_.max_clauses, state_.clauses.size());
  for (std::size_t i = 0; i < limit; ++i) {
    if (state_.selectable[i]) obs.action_mask[i] = 1.0;
  }
  return obs;
}

std::optional<std::string> Environment::render(RenderMode mode,
                                               std::ostream* out) const {
  if (!reset_) throw NotResetError("render() called before reset()");
  std::string text;
  for (const auto& clause : state_.clauses) {
    text += render_clause(*clause, config_.verbose_render);
    text += '\n';
  }
  if (mode == RenderMode::kAnsi) return text;
  (out != nullptr ? *out : std::cout) << text << std::flush;
  return std::nullopt;
}

void Environment::close() {
  if (backend_) backend_->stop();
  reset_ = false;
  finished_ = false;
}

}  // namespace satgym
