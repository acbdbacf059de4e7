#include "satgym/wrappers.hpp"

#include <algorithm>

namespace satgym {

std::optional<std::size_t> argmin_selectable(std::span<const double> keys,
                                             std::span<const double> mask) {
  std::optional<std::size_t> best;
  const std::size_t limit = std::min(keys.size(), mask.size());
  for (std::size_t i = 0; i < limit; ++i) {
    // Strict comparison keeps the lowest index among equal keys.
    if (mask[i] == 1.0 && (!best || keys[i] < keys[*best])) best = i;
  }
  return best;
}

std::size_t bandit_map_action(const Observation& observation, int arm) {
  if (arm != kAgeArm && arm != kWeightArm) {
    throw InvalidActionError("bandit arm " + std::to_string(arm) + " is not 0 or 1");
  }
  const std::size_t limit = std::min(observation.real_obs.size(), observation.action_mask.size());
  std::vector<double> keys(limit);
  for (std::size_t i = 0; i < limit; ++i) {
    if (observation.action_mask[i] != 1.0) continue;
    const Clause& clause = *observation.real_obs[i];
    keys[i] = static_cast<double>(arm == kAgeArm ? clause.birth_step() : clause_weight(clause));
  }
  const auto best = argmin_selectable(keys, observation.action_mask);
  if (!best) throw InvalidActionError("no selectable clause for the bandit arm");
  return *best;
}

std::array<double, kFeatureDimension> extract_features(const Clause& clause,
                                                       std::size_t step_count) {
  std::array<double, kFeatureDimension> out{};
  out[0] = static_cast<double>(step_count - std::min(step_count, clause.birth_step()));
  out[1] = static_cast<double>(clause_weight(clause));
  out[2] = static_cast<double>(clause.parsed_literals().size());
  for (const auto& literal : clause.parsed_literals()) {
    if (literal.negated) out[3] += 1.0;
    if (is_equality(literal.atom)) out[4] += 1.0;
  }
  const std::string& role = clause.role();
  std::size_t slot = 3;
  if (role == "axiom" || role == "input") {
    slot = 0;
  } else if (role == "hypothesis") {
    slot = 1;
  } else if (role == "negated_conjecture") {
    slot = 2;
  }
  out[5 + slot] = 1.0;
  return out;
}

std::vector<double> FeatureEncoder::encode(const Clause& clause, std::size_t step_count) {
  const auto features = extract_features(clause, step_count);
  return {features.begin(), features.end()};
}

NumericObservation encode_observation(const Observation& observation, std::size_t step_count,
                                      ClauseEncoder& encoder,
                                      std::vector<std::vector<double>>* cache) {
  NumericObservation out;
  out.rows = observation.action_mask.size();
  out.cols = encoder.dimension();
  out.data.assign(out.rows * out.cols, 0.0);
  out.action_mask = observation.action_mask;
  // On the truncating step there are more clauses than rows; the extra
  // clauses are not shown.
  const std::size_t filled = std::min(out.rows, observation.real_obs.size());
  for (std::size_t i = 0; i < filled; ++i) {
    std::vector<double> row;
    if (cache != nullptr && i < cache->size()) {
      row = (*cache)[i];
    } else {
      row = encoder.encode(*observation.real_obs[i], step_count);
      if (row.size() != out.cols) {
        throw ProtocolError("encoder returned " + std::to_string(row.size()) +
                            " values, expected " + std::to_string(out.cols));
      }
      if (cache != nullptr) cache->push_back(row);
    }
    std::copy(row.begin(), row.end(), out.data.begin() + static_cast<std::ptrdiff_t>(i * out.cols));
  }
  return out;
}

}  // namespace satgym
