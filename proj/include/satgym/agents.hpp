#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "satgym/environment.hpp"
#include "satgym/error.hpp"

namespace satgym {

// A policy over either clause indices or the two bandit arms.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual std::string name() const = 0;
  // True when act() returns an arm (kAgeArm or kWeightArm) instead of a
  // clause index.
  virtual bool uses_arms() const = 0;
  // Reseeds the agent's random stream for the coming episode.
  virtual void begin_episode(std::uint64_t seed) { rng_.seed(seed); }
  virtual std::size_t act(const Observation& observation) = 0;
  // Terminal reward of the finished episode.
  virtual void end_episode(double /*reward*/) {}

 protected:
  std::mt19937_64 rng_;
};

// Uniform over the selectable clause indices.
class MaskedRandomAgent : public Agent {
 public:
  std::string name() const override { return "random"; }
  bool uses_arms() const override { return false; }
  std::size_t act(const Observation& observation) override;
};

// Uniform over the two arms at every step.
class RandomArmAgent : public Agent {
 public:
  std::string name() const override { return "random"; }
  bool uses_arms() const override { return true; }
  std::size_t act(const Observation& observation) override;
};

struct BetaArm {
  double alpha = 1.0;
  double beta = 1.0;

  bool operator==(const BetaArm&) const = default;
};

// Beta-Bernoulli Thompson sampling over the two arms. Each step samples a
// success rate per arm from its posterior and plays the larger (arm 0 on a
// tie). The posterior only moves at episode end: every arm played during the
// episode is updated once with the terminal reward.
class ThompsonAgent : public Agent {
 public:
  std::string name() const override { return "thompson"; }
  bool uses_arms() const override { return true; }
  void begin_episode(std::uint64_t seed) override;
  std::size_t act(const Observation& observation) override;
  void end_episode(double reward) override;

  // Posterior draw and argmax, independent of any observation.
  int sample_arm(std::mt19937_64& rng) const;
  // Conjugate update. Throws Error unless reward is 0.0 or 1.0.
  void update(int arm, double reward);

  const std::array<BetaArm, 2>& arms() const { return arms_; }
  void set_arms(const std::array<BetaArm, 2>& arms) { arms_ = arms; }

 private:
  std::array<BetaArm, 2> arms_{};
  std::array<bool, 2> played_{};
};

// "random" or "thompson". `arms` selects the random agent's action space.
// Throws Error for other names.
std::unique_ptr<Agent> make_agent(const std::string& name, bool arms);

}  // namespace satgym
