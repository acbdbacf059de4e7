#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "satgym/backend.hpp"

namespace satgym {

// Binary resolvents of `given` against `partner`, one per unifiable pair of
// complementary literals, in (given literal, partner literal) order. Clauses
// are renamed apart internally; results use variables X0, X1, ...
std::vector<Clause> resolvents(const Clause& given, const Clause& partner);

// Factors of `clause`, one per unifiable pair of same-polarity literals.
std::vector<Clause> factors(const Clause& clause);

// Reference given-clause prover: binary resolution and factoring, with
// tautology deletion and variant elimination. Derived clauses are labelled
// c_1, c_2, ... skipping names already used by the input.
class EmbeddedProver : public Backend {
 public:
  std::string name() const override { return "embedded"; }
  std::vector<Clause> start(const Problem& problem) override;
  SelectResult select(const std::string& label) override;

  std::size_t clause_count() const { return clauses_.size(); }
  std::size_t processed_count() const { return processed_.size(); }

 private:
  bool is_redundant(const Clause& candidate,
                    const std::vector<Clause>& pending) const;
  std::string fresh_label();

  std::vector<Clause> clauses_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_multimap<std::size_t, std::size_t> shapes_;
  std::vector<std::size_t> processed_;
  std::vector<bool> is_processed_;
  std::size_t unprocessed_ = 0;
  std::size_t next_label_ = 1;
};

}  // namespace satgym
