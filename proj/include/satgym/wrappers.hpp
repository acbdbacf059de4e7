#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "satgym/environment.hpp"
#include "satgym/error.hpp"

namespace satgym {

// Wrappers hold a reference to the environment or wrapper they decorate and
// expose the same reset/step/unwrapped interface, so they nest in any order:
//
//   Environment env;
//   BanditActions bandit(env);
//   TimeLimit limited(bandit, 50);
//   limited.step(kWeightArm);

// Arms of the two-queue action wrapper.
inline constexpr int kAgeArm = 0;     // oldest selectable clause
inline constexpr int kWeightArm = 1;  // lightest selectable clause

// Lowest index among those with mask 1.0 that minimizes `keys`. nullopt
// when no index is selectable.
std::optional<std::size_t> argmin_selectable(std::span<const double> keys,
                                             std::span<const double> mask);

// Clause index chosen by `arm`: the selectable index minimizing
// (birth_step, index) for the age arm and (clause_weight, index) for the
// weight arm. Throws InvalidActionError for other arms or when nothing is
// selectable.
std::size_t bandit_map_action(const Observation& observation, int arm);

template <class Inner>
class BanditActions {
 public:
  using ObservationType = typename Inner::ObservationType;
  using ActionType = int;

  explicit BanditActions(Inner& inner) : inner_(inner) {}

  std::pair<ObservationType, Info> reset(std::optional<std::uint64_t> seed = {}) {
    return inner_.reset(seed);
  }

  Outcome<ObservationType> step(int arm) {
    const Environment& env = inner_.unwrapped();
    if (!env.has_been_reset()) throw NotResetError("step() called before reset()");
    if (env.episode_over()) {
      throw EpisodeFinishedError("the episode is over; call reset() first");
    }
    return inner_.step(bandit_map_action(env.observation(), arm));
  }

  Environment& unwrapped() { return inner_.unwrapped(); }
  Inner& inner() { return inner_; }

 private:
  Inner& inner_;
};

// Truncates the episode once `limit` steps have been taken since reset,
// unless the step terminated it.
template <class Inner>
class TimeLimit {
 public:
  using ObservationType = typename Inner::ObservationType;
  using ActionType = typename Inner::ActionType;

  TimeLimit(Inner& inner, std::size_t limit) : inner_(inner), limit_(limit) {
    if (limit == 0) throw Error("time limit must be positive");
  }

  std::pair<ObservationType, Info> reset(std::optional<std::uint64_t> seed = {}) {
    elapsed_ = 0;
    over_ = false;
    return inner_.reset(seed);
  }

  Outcome<ObservationType> step(ActionType action) {
    if (over_) throw EpisodeFinishedError("time limit reached; call reset() first");
    auto outcome = inner_.step(action);
    ++elapsed_;
    if (elapsed_ >= limit_ && !outcome.terminated) outcome.truncated = true;
    over_ = outcome.terminated || outcome.truncated;
    return outcome;
  }

  std::size_t elapsed() const { return elapsed_; }
  std::size_t limit() const { return limit_; }
  Environment& unwrapped() { return inner_.unwrapped(); }
  Inner& inner() { return inner_; }

 private:
  Inner& inner_;
  std::size_t limit_;
  std::size_t elapsed_ = 0;
  bool over_ = false;
};

// Fixed-shape numeric view of an observation: `rows` x `cols`, row-major.
struct NumericObservation {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  std::vector<double> action_mask;

  double at(std::size_t row, std::size_t col) const { return data[row * cols + col]; }
  std::vector<double> row(std::size_t index) const {
    return {data.begin() + static_cast<std::ptrdiff_t>(index * cols),
            data.begin() + static_cast<std::ptrdiff_t>((index + 1) * cols)};
  }
};

// Turns one clause into a fixed-length vector.
class ClauseEncoder {
 public:
  virtual ~ClauseEncoder() = default;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<double> encode(const Clause& clause, std::size_t step_count) = 0;
  // False when the row depends on the clause alone, so it can be kept for
  // the rest of the episode.
  virtual bool depends_on_step() const { return false; }
};

inline constexpr std::size_t kFeatureDimension = 9;

// [age, weight, literals, negative literals, equality literals, role one-hot
// over {axiom, hypothesis, negated_conjecture, other}].
std::array<double, kFeatureDimension> extract_features(const Clause& clause,
                                                       std::size_t step_count);

class FeatureEncoder : public ClauseEncoder {
 public:
  std::size_t dimension() const override { return kFeatureDimension; }
  std::vector<double> encode(const Clause& clause, std::size_t step_count) override;
  bool depends_on_step() const override { return true; }
};

// Fills rows for clauses [0, min(clause count, rows)); the rest stay zero.
// `cache` holds rows from earlier calls in the same episode and is extended.
NumericObservation encode_observation(const Observation& observation, std::size_t step_count,
                                      ClauseEncoder& encoder,
                                      std::vector<std::vector<double>>* cache = nullptr);

// Replaces the observation with a max_clauses x dimension matrix. Every
// clause keeps its row after being selected; the mask tells them apart.
template <class Inner>
class EncodedObservation {
 public:
  using ObservationType = NumericObservation;
  using ActionType = typename Inner::ActionType;

  EncodedObservation(Inner& inner, ClauseEncoder& encoder) : inner_(inner), encoder_(encoder) {}

  std::pair<NumericObservation, Info> reset(std::optional<std::uint64_t> seed = {}) {
    auto result = inner_.reset(seed);
    cache_.clear();
    return {current(), std::move(result.second)};
  }

  Outcome<NumericObservation> step(ActionType action) {
    auto outcome = inner_.step(action);
    return {current(), outcome.reward, outcome.terminated, outcome.truncated,
            std::move(outcome.info)};
  }

  // Encoding of the current state. Throws Error before the first reset.
  NumericObservation current() {
    const Environment& env = inner_.unwrapped();
    if (!env.has_been_reset() || env.state().clauses.empty()) {
      throw Error("no clauses to encode; call reset() first");
    }
    return encode_observation(env.observation(), env.state().step_count, encoder_,
                              encoder_.depends_on_step() ? nullptr : &cache_);
  }

  Environment& unwrapped() { return inner_.unwrapped(); }
  Inner& inner() { return inner_; }

 private:
  Inner& inner_;
  ClauseEncoder& encoder_;
  std::vector<std::vector<double>> cache_;
};

}  // namespace satgym
