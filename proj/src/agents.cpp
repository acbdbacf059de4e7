#include "satgym/agents.hpp"

#include "satgym/error.hpp"
#include "satgym/wrappers.hpp"

namespace satgym {

std::size_t MaskedRandomAgent::act(const Observation& observation) {
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < observation.action_mask.size(); ++i) {
    if (observation.action_mask[i] == 1.0) live.push_back(i);
  }
  if (live.empty()) throw InvalidActionError("no selectable clause");
  return live[std::uniform_int_distribution<std::size_t>(0, live.size() - 1)(rng_)];
}

std::size_t RandomArmAgent::act(const Observation&) {
  return std::uniform_int_distribution<std::size_t>(0, 1)(rng_);
}

void ThompsonAgent::begin_episode(std::uint64_t seed) {
  Agent::begin_episode(seed);
  played_ = {};
}

int ThompsonAgent::sample_arm(std::mt19937_64& rng) const {
  std::array<double, 2> theta{};
  for (int k = 0; k < 2; ++k) {
    // Beta(a, b) as X / (X + Y) with X ~ Gamma(a), Y ~ Gamma(b).
    const double x = std::gamma_distribution<double>(arms_[k].alpha, 1.0)(rng);
    const double y = std::gamma_distribution<double>(arms_[k].beta, 1.0)(rng);
    theta[k] = x / (x + y);
  }
  return theta[1] > theta[0] ? kWeightArm : kAgeArm;
}

std::size_t ThompsonAgent::act(const Observation&) {
  const int arm = sample_arm(rng_);
  played_[arm] = true;
  return static_cast<std::size_t>(arm);
}

void ThompsonAgent::update(int arm, double reward) {
  if (arm != kAgeArm && arm != kWeightArm) {
    throw Error("arm " + std::to_string(arm) + " is not 0 or 1");
  }
  if (reward == 1.0) {
    arms_[arm].alpha += 1.0;
  } else if (reward == 0.0) {
    arms_[arm].beta += 1.0;
  } else {
    throw Error("Thompson update needs a reward of 0 or 1, got " + std::to_string(reward));
  }
}

void ThompsonAgent::end_episode(double reward) {
  for (int arm = 0; arm < 2; ++arm) {
    if (played_[arm]) update(arm, reward);
  }
  played_ = {};
}

std::unique_ptr<Agent> make_agent(const std::string& name, bool arms) {
  if (name == "random") {
    if (arms) return std::make_unique<RandomArmAgent>();
    return std::make_unique<MaskedRandomAgent>();
  }
  if (name == "thompson") return std::make_unique<ThompsonAgent>();
  throw Error("unknown agent '" + name + "' (expected random or thompson)");
}

}  // namespace satgym
