#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "satgym/embedding.hpp"
#include "satgym/environment.hpp"
#include "satgym/error.hpp"
#include "satgym/wrappers.hpp"
#include "support/generators.hpp"
#include "support/problems.hpp"

using namespace satgym;
using satgym::testing::problem_file;

namespace {

ClausePtr make_clause(const std::string& label, const std::string& literals,
                      std::size_t birth, const std::string& role = "plain") {
  return std::make_shared<const Clause>(
      Clause::from_text(label, role, literals, birth == 0 ? "input" : "resolution", {}, birth));
}

Observation observation_of(std::vector<ClausePtr> clauses, std::vector<double> mask) {
  Observation obs;
  obs.real_obs = std::move(clauses);
  obs.action_mask = std::move(mask);
  return obs;
}

// Brute-force argmin over (key, index) for selectable indices.
std::size_t oracle_pick(const Observation& obs, int arm) {
  std::vector<std::tuple<std::size_t, std::size_t>> candidates;
  for (std::size_t i = 0; i < obs.real_obs.size() && i < obs.action_mask.size(); ++i) {
    if (obs.action_mask[i] != 1.0) continue;
    const Clause& c = *obs.real_obs[i];
    candidates.emplace_back(arm == 0 ? c.birth_step() : clause_weight(c), i);
  }
  return std::get<1>(*std::min_element(candidates.begin(), candidates.end()));
}

// In-process embedder with the stub service's vectors.
class LocalEmbedder : public Embedder {
 public:
  explicit LocalEmbedder(std::size_t dimension) : dimension_(dimension) {}
  std::size_t dimension() const override { return dimension_; }
  std::vector<double> embed(const std::string& expression) override {
    ++calls;
    if (expression == fail_on) throw EmbeddingError("service down");
    return stub_embedding(expression, dimension_);
  }
  std::size_t calls = 0;
  std::string fail_on;

 private:
  std::size_t dimension_;
};

std::filesystem::path write_problem(const std::string& stem, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / (stem + ".p");
  std::ofstream(path) << text;
  return path;
}

struct TraceStep {
  double reward;
  bool terminated;
  bool truncated;
  std::vector<std::string> clauses;
  std::vector<double> mask;
  std::vector<double> features;

  bool operator==(const TraceStep&) const = default;
};

template <class Wrapped>
std::vector<TraceStep> trace(Wrapped& wrapped, const std::vector<int>& arms,
                             FeatureEncoder& encoder) {
  std::vector<TraceStep> out;
  wrapped.reset();
  for (int arm : arms) {
    auto outcome = wrapped.step(arm);
    const Environment& env = wrapped.unwrapped();
    TraceStep step{outcome.reward, outcome.terminated, outcome.truncated, {}, {}, {}};
    for (const auto& clause : env.state().clauses) step.clauses.push_back(render_clause(*clause, true));
    step.mask = env.observation().action_mask;
    step.features =
        encode_observation(env.observation(), env.state().step_count, encoder).data;
    out.push_back(std::move(step));
    if (outcome.terminated || outcome.truncated) break;
  }
  return out;
}

}  // namespace

TEST_SUITE("wrappers") {

TEST_CASE("bandit_map_action: age and weight queues") {
  const auto obs = observation_of({make_clause("c0", "p(f(a),g(b))", 0),
                                   make_clause("c1", "p(a)", 0), make_clause("c2", "r", 1)},
                                  {1.0, 1.0, 1.0, 0.0});
  REQUIRE(clause_weight(*obs.real_obs[0]) == 5);
  REQUIRE(clause_weight(*obs.real_obs[1]) == 2);
  REQUIRE(clause_weight(*obs.real_obs[2]) == 1);
  CHECK(bandit_map_action(obs, kAgeArm) == oracle_pick(obs, 0));
  CHECK(bandit_map_action(obs, kAgeArm) == 0);
  CHECK(bandit_map_action(obs, kWeightArm) == oracle_pick(obs, 1));
  CHECK(bandit_map_action(obs, kWeightArm) == 2);

  auto masked = obs;
  masked.action_mask[0] = 0.0;
  CHECK(bandit_map_action(masked, kAgeArm) == 1);

  auto single = obs;
  single.action_mask = {0.0, 1.0, 0.0, 0.0};
  CHECK(bandit_map_action(single, kAgeArm) == 1);
  CHECK(bandit_map_action(single, kWeightArm) == 1);

  auto none = obs;
  none.action_mask.assign(4, 0.0);
  CHECK_THROWS_AS(bandit_map_action(none, kAgeArm), InvalidActionError);
  CHECK_THROWS_AS(bandit_map_action(obs, 2), InvalidActionError);
  CHECK_THROWS_AS(bandit_map_action(obs, -1), InvalidActionError);
}

TEST_CASE("property: bandit choice matches brute force and is scale invariant") {
  std::mt19937_64 rng(7);
  const auto sig = testing::small_signature();
  std::bernoulli_distribution live(0.6);
  std::uniform_int_distribution<std::size_t> birth(0, 4);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int round = 0; round < 500; ++round) {
    std::vector<ClausePtr> clauses;
    std::vector<double> mask;
    const std::size_t n = 1 + rng() % 12;
    for (std::size_t i = 0; i < n; ++i) {
      auto literals = testing::random_literals(rng, sig, 3, 3);
      clauses.push_back(std::make_shared<const Clause>(
          "c" + std::to_string(i), "plain", std::move(literals), "resolution",
          std::vector<std::string>{}, birth(rng)));
      mask.push_back(live(rng) ? 1.0 : 0.0);
    }
    mask.resize(n + 3, 0.0);
    if (std::count(mask.begin(), mask.end(), 1.0) == 0) mask[rng() % n] = 1.0;
    const auto obs = observation_of(clauses, mask);
    for (int arm : {kAgeArm, kWeightArm}) {
      const std::size_t chosen = bandit_map_action(obs, arm);
      CHECK(mask[chosen] == 1.0);
      CHECK(chosen == oracle_pick(obs, arm));
    }
    std::vector<double> weights;
    for (const auto& c : clauses) weights.push_back(static_cast<double>(clause_weight(*c)));
    std::vector<double> scaled = weights;
    const double factor = scale(rng);
    for (auto& w : scaled) w *= factor;
    CHECK(argmin_selectable(weights, mask) == argmin_selectable(scaled, mask));
  }
}

TEST_CASE("property: bandit actions never hit a masked index") {
  std::mt19937_64 rng(11);
  const auto dir = std::filesystem::temp_directory_path() / "satgym_bandit_property";
  std::size_t steps = 0;
  for (int episode = 0; episode < 200; ++episode) {
    EnvConfig config;
    config.max_clauses = 10 + rng() % 40;
    Environment env(config);
    env.set_task(episode % 2 == 0
                     ? testing::write_random_problem(rng, dir, "b" + std::to_string(episode))
                     : problem_file(testing::bundled_problems()[rng() % 5]));
    if (env.task().clauses.size() > config.max_clauses) continue;
    BanditActions bandit(env);
    bandit.reset();
    for (int n = 0; n < 100 && !env.episode_over(); ++n) {
      const int arm = static_cast<int>(rng() % 2);
      const std::size_t expected = bandit_map_action(env.observation(), arm);
      REQUIRE(env.observation().action_mask[expected] == 1.0);
      CHECK_NOTHROW(bandit.step(arm));
      ++steps;
    }
  }
  std::filesystem::remove_all(dir);
  CHECK(steps > 500);
}

TEST_CASE("time_limit: truncation and precedence of termination") {
  SUBCASE("limit 1 on a problem not solved in one step") {
    Environment env;
    TimeLimit limited(env, 1);
    limited.reset();
    auto outcome = limited.step(0);
    CHECK_FALSE(outcome.terminated);
    CHECK(outcome.truncated);
    CHECK_THROWS_AS(limited.step(1), EpisodeFinishedError);
    limited.reset();
    CHECK(limited.elapsed() == 0);
    CHECK_NOTHROW(limited.step(0));
  }
  SUBCASE("refutation before the limit") {
    EnvConfig config;
    config.problem_path = problem_file("p-not-p.p");
    Environment env(config);
    TimeLimit limited(env, 10);
    limited.reset();
    CHECK_FALSE(limited.step(0).terminated);
    auto outcome = limited.step(1);
    CHECK(outcome.terminated);
    CHECK_FALSE(outcome.truncated);
    CHECK(outcome.reward == 1.0);
  }
  SUBCASE("limit equal to the solution length") {
    EnvConfig config;
    config.problem_path = problem_file("bandit-separation.p");
    config.max_clauses = 15;
    Environment env(config);
    // Two weight-arm steps refute the fixture.
    BanditActions bandit(env);
    TimeLimit limited(bandit, 2);
    limited.reset();
    auto first = limited.step(kWeightArm);
    CHECK_FALSE(first.terminated);
    CHECK_FALSE(first.truncated);
    auto second = limited.step(kWeightArm);
    CHECK(second.terminated);
    CHECK_FALSE(second.truncated);
    CHECK(second.reward == 1.0);
  }
  Environment env;
  CHECK_THROWS_AS(TimeLimit(env, 0), Error);
}

TEST_CASE("extract_features: field definitions") {
  const Clause unit = Clause::from_text("u", "axiom", "p(a)", "axiom", {}, 0);
  const auto features = extract_features(unit, 3);
  CHECK(std::vector<double>(features.begin(), features.end()) ==
        std::vector<double>{3, 2, 1, 0, 0, 1, 0, 0, 0});

  const Clause empty = Clause::from_text("e", "plain", "$false", "resolution", {"x", "y"}, 2);
  const auto empty_features = extract_features(empty, 2);
  CHECK(empty_features[0] == 0);
  CHECK(empty_features[1] == 0);
  CHECK(empty_features[2] == 0);
  CHECK(empty_features[8] == 1);

  const Clause diseq = Clause::from_text("d", "negated_conjecture", "~(a=b)",
                                         "negated_conjecture", {}, 0);
  const auto diseq_features = extract_features(diseq, 0);
  CHECK(diseq_features[3] == 1);
  CHECK(diseq_features[4] == 1);
  CHECK(diseq_features[1] == 3);
  CHECK(diseq_features[7] == 1);

  const Clause hyp = Clause::from_text("h", "hypothesis", "~q(X,Y) | X = Y", "hypothesis");
  const auto hyp_features = extract_features(hyp, 5);
  CHECK(std::vector<double>(hyp_features.begin(), hyp_features.end()) ==
        std::vector<double>{5, 6, 2, 1, 1, 0, 1, 0, 0});
}

TEST_CASE("embed_observation: shape, padding and per-episode caching") {
  const auto path = write_problem("satgym_three", "cnf(a1, axiom, p(X) | q(X)).\n"
                                                  "cnf(a2, axiom, ~p(a)).\n"
                                                  "cnf(a3, negated_conjecture, ~q(a)).\n");
  EnvConfig config;
  config.max_clauses = 20;
  config.problem_path = path;
  Environment env(config);
  LocalEmbedder embedder(256);
  EmbeddingEncoder encoder(embedder);
  EncodedObservation embedded(env, encoder);
  CHECK_THROWS_AS(embedded.current(), Error);

  auto [obs, info] = embedded.reset();
  CHECK(obs.rows == 20);
  CHECK(obs.cols == 256);
  CHECK(obs.data.size() == 20 * 256);
  for (std::size_t r = 3; r < 20; ++r) {
    const auto row = obs.row(r);
    CHECK(std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; }));
  }
  CHECK(obs.row(0) == stub_embedding("p(v_x) or q(v_x)", 256));
  CHECK(embedder.calls == 3);

  auto outcome = embedded.step(0);
  CHECK(outcome.observation.rows == 20);
  CHECK(outcome.observation.cols == 256);
  CHECK(embedder.calls == 3);
  CHECK(outcome.observation.row(0) == obs.row(0));
  CHECK(outcome.observation.action_mask[0] == 0.0);
  outcome = embedded.step(1);
  const std::size_t live = env.state().clauses.size();
  REQUIRE(live == 4);
  // Only the new clause q(a) was embedded; selected clauses keep their rows.
  CHECK(embedder.calls == 4);
  CHECK(outcome.observation.row(3) == stub_embedding("q(a)", 256));
  CHECK(outcome.observation.row(1) == obs.row(1));
  for (std::size_t r = live; r < 20; ++r) {
    const auto row = outcome.observation.row(r);
    CHECK(std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; }));
  }

  embedded.reset();
  CHECK(embedder.calls == 7);
  std::filesystem::remove(path);
}

TEST_CASE("embed_observation: identical literals give identical rows") {
  const auto path = write_problem("satgym_twins", "cnf(a1, axiom, p(X)).\n"
                                                  "cnf(a2, hypothesis, p(Y)).\n"
                                                  "cnf(a3, axiom, p(X)).\n");
  EnvConfig config;
  config.max_clauses = 8;
  config.problem_path = path;
  Environment env(config);
  LocalEmbedder embedder(16);
  EmbeddingEncoder encoder(embedder);
  EncodedObservation embedded(env, encoder);
  auto [obs, info] = embedded.reset();
  CHECK(obs.row(0) == obs.row(2));
  CHECK(obs.row(0) != obs.row(1));
  std::filesystem::remove(path);
}

TEST_CASE("embed_observation: embedder failure names the clause") {
  EnvConfig config;
  config.problem_path = problem_file("p-not-p.p");
  Environment env(config);
  LocalEmbedder embedder(8);
  embedder.fail_on = "not p";
  EmbeddingEncoder encoder(embedder);
  EncodedObservation embedded(env, encoder);
  try {
    embedded.reset();
    FAIL("reset succeeded");
  } catch (const EmbeddingError& e) {
    const std::string message = e.what();
    CHECK(message.find("service down") != std::string::npos);
    CHECK(message.find("'p_fails'") != std::string::npos);
  }
}

TEST_CASE("feature observation: shape is constant across an episode") {
  EnvConfig config;
  config.max_clauses = 40;
  config.problem_path = problem_file("set-membership.p");
  Environment env(config);
  FeatureEncoder features;
  EncodedObservation encoded(env, features);
  auto [obs, info] = encoded.reset();
  CHECK(obs.rows == 40);
  CHECK(obs.cols == kFeatureDimension);
  bool over = false;
  for (std::size_t n = 0; n < 200 && !over; ++n) {
    std::size_t action = 0;
    while (env.observation().action_mask[action] != 1.0) ++action;
    auto outcome = encoded.step(action);
    CHECK(outcome.observation.rows == 40);
    CHECK(outcome.observation.cols == kFeatureDimension);
    CHECK(outcome.observation.data.size() == 40 * kFeatureDimension);
    // Ages move with the step count.
    CHECK(outcome.observation.at(0, 0) == static_cast<double>(env.state().step_count));
    over = outcome.terminated || outcome.truncated;
  }
  CHECK(over);
}

TEST_CASE("property: wrapper composition order does not change traces") {
  std::mt19937_64 rng(5);
  FeatureEncoder encoder;
  LocalEmbedder embedder(4);
  EmbeddingEncoder embedding(embedder);
  const auto& names = testing::bundled_problems();
  for (int round = 0; round < 60; ++round) {
    EnvConfig config;
    config.max_clauses = 15 + rng() % 60;
    config.problem_path = problem_file(names[rng() % names.size()]);
    const std::size_t limit = 1 + rng() % 30;
    std::vector<int> arms(40);
    for (auto& arm : arms) arm = static_cast<int>(rng() % 2);

    std::vector<std::vector<TraceStep>> traces;
    {
      Environment env(config);
      TimeLimit limited(env, limit);
      BanditActions bandit(limited);
      EncodedObservation embedded(bandit, embedding);
      traces.push_back(trace(embedded, arms, encoder));
    }
    {
      Environment env(config);
      EncodedObservation embedded(env, embedding);
      BanditActions bandit(embedded);
      TimeLimit limited(bandit, limit);
      traces.push_back(trace(limited, arms, encoder));
    }
    {
      Environment env(config);
      BanditActions bandit(env);
      EncodedObservation embedded(bandit, embedding);
      TimeLimit limited(embedded, limit);
      traces.push_back(trace(limited, arms, encoder));
    }
    {
      Environment env(config);
      EncodedObservation embedded(env, embedding);
      TimeLimit limited(embedded, limit);
      BanditActions bandit(limited);
      traces.push_back(trace(bandit, arms, encoder));
    }
    for (std::size_t i = 1; i < traces.size(); ++i) CHECK(traces[i] == traces[0]);
    CHECK(!traces[0].empty());
  }
}

}  // TEST_SUITE
