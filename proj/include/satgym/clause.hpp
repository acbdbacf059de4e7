#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "satgym/term.hpp"

namespace satgym {

struct Literal {
  bool negated = false;
  Term atom;

  bool operator==(const Literal& other) const = default;
};

std::string to_string(const Literal& literal);

// Inference rule names that mark an input clause (birth step zero).
bool is_input_rule(const std::string& rule);

// Rule assigned to a cnf statement that carries no inference annotation.
std::string default_input_rule(const std::string& role);

// One clause of the proof state. Immutable once built; `literals()` is the
// canonical TPTP rendering of `parsed_literals()`.
class Clause {
 public:
  Clause(std::string label, std::string role, std::vector<Literal> literals,
         std::string inference_rule, std::vector<std::string> parents = {},
         std::size_t birth_step = 0);

  // Parses `text` as a TPTP CNF disjunction.
  static Clause from_text(std::string label, std::string role,
                          const std::string& text,
                          std::string inference_rule = "input",
                          std::vector<std::string> parents = {},
                          std::size_t birth_step = 0);

  const std::string& literals() const { return text_; }
  const std::vector<Literal>& parsed_literals() const { return literals_; }
  const std::string& label() const { return label_; }
  const std::string& role() const { return role_; }
  const std::string& inference_rule() const { return inference_rule_; }
  const std::vector<std::string>& inference_parents() const { return parents_; }
  std::size_t birth_step() const { return birth_step_; }

  bool is_empty() const { return literals_.empty(); }

  Clause with_birth_step(std::size_t step) const;
  Clause with_label(std::string label) const;

  bool operator==(const Clause& other) const;

 private:
  std::string label_;
  std::string role_;
  std::vector<Literal> literals_;
  std::string text_;
  std::string inference_rule_;
  std::vector<std::string> parents_;
  std::size_t birth_step_;
};

using ClausePtr = std::shared_ptr<const Clause>;

// "$false" for the empty clause, otherwise literals joined by " | ".
std::string render_literals(std::span<const Literal> literals);

// Verbose: `cnf(label, role, literals).`, with an inference annotation when
// the clause has parents or a non-default rule. Terse: literals only.
std::string render_clause(const Clause& clause, bool verbose);

// Symbol occurrences over all literals: predicates, functions, constants and
// variables each count once per occurrence. "=" counts as a predicate.
std::size_t clause_weight(const Clause& clause);
std::size_t literals_weight(std::span<const Literal> literals);

// True iff some literal occurs together with its exact negation.
bool is_tautology(const Clause& clause);
bool is_tautology(std::span<const Literal> literals);

// Equal up to a bijective renaming of variables and reordering of literals.
bool is_variant(std::span<const Literal> lhs, std::span<const Literal> rhs);

// Renames variables to X0, X1, ... in order of first occurrence.
std::vector<Literal> normalize_variables(std::span<const Literal> literals);

// Removes repeated identical literals, keeping the first occurrence.
std::vector<Literal> remove_duplicate_literals(std::vector<Literal> literals);

// Order-insensitive hash that ignores variable names.
std::size_t shape_hash(std::span<const Literal> literals);

}  // namespace satgym
