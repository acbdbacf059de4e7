#include "satgym/embedded_prover.hpp"

#include <unordered_map>

#include "satgym/error.hpp"
#include "satgym/unify.hpp"

namespace satgym {

const char* to_string(ProverStatus status) {
  switch (status) {
    case ProverStatus::kRunning: return "running";
    case ProverStatus::kRefutation: return "refutation";
    case ProverStatus::kSaturated: return "saturated";
  }
  return "unknown";
}

namespace {

// Renames every variable of `literals` to V<n> drawn from `counter`.
std::vector<Literal> rename_apart(const std::vector<Literal>& literals,
                                  std::size_t& counter) {
  std::unordered_map<std::string, std::string> names;
  auto rename = [&](const std::string& name) {
    auto [it, inserted] = names.try_emplace(name);
    if (inserted) it->second = "V" + std::to_string(counter++);
    return it->second;
  };
  std::vector<Literal> out;
  out.reserve(literals.size());
  for (const auto& literal : literals) {
    out.push_back({literal.negated, rename_variables(literal.atom, rename)});
  }
  return out;
}

bool same_predicate(const Term& lhs, const Term& rhs) {
  return lhs.name == rhs.name && lhs.args.size() == rhs.args.size();
}

std::vector<Literal> finish(std::vector<Literal> literals) {
  return normalize_variables(remove_duplicate_literals(std::move(literals)));
}

void append_resolvents(const std::vector<Literal>& given,
                       const std::vector<Literal>& partner,
                       const std::vector<std::string>& parents,
                       std::vector<Clause>& out) {
  for (std::size_t i = 0; i < given.size(); ++i) {
    for (std::size_t j = 0; j < partner.size(); ++j) {
      if (given[i].negated == partner[j].negated ||
          !same_predicate(given[i].atom, partner[j].atom)) {
        continue;
      }
      auto sigma = unify(given[i].atom, partner[j].atom);
      if (!sigma) continue;
      std::vector<Literal> literals;
      literals.reserve(given.size() + partner.size() - 2);
      for (std::size_t k = 0; k < given.size(); ++k) {
        if (k != i) literals.push_back(sigma->apply(given[k]));
      }
      for (std::size_t k = 0; k < partner.size(); ++k) {
        if (k != j) literals.push_back(sigma->apply(partner[k]));
      }
      out.emplace_back("", "plain", finish(std::move(literals)), "resolution",
                       parents);
    }
  }
}

}  // namespace

std::vector<Clause> resolvents(const Clause& given, const Clause& partner) {
  std::size_t counter = 0;
  const auto lhs = rename_apart(given.parsed_literals(), counter);
  const auto rhs = rename_apart(partner.parsed_literals(), counter);
  std::vector<Clause> out;
  append_resolvents(lhs, rhs, {given.label(), partner.label()}, out);
  return out;
}

std::vector<Clause> factors(const Clause& clause) {
  const auto& literals = clause.parsed_literals();
  std::vector<Clause> out;
  for (std::size_t i = 0; i < literals.size(); ++i) {
    for (std::size_t j = i + 1; j < literals.size(); ++j) {
      if (literals[i].negated != literals[j].negated ||
          !same_predicate(literals[i].atom, literals[j].atom)) {
        continue;
      }
      auto sigma = unify(literals[i].atom, literals[j].atom);
      if (!sigma) continue;
      std::vector<Literal> merged;
      merged.reserve(literals.size() - 1);
      for (std::size_t k = 0; k < literals.size(); ++k) {
        if (k != j) merged.push_back(sigma->apply(literals[k]));
      }
      out.emplace_back("", "plain", finish(std::move(merged)), "factoring",
                       std::vector<std::string>{clause.label()});
    }
  }
  return out;
}

std::vector<Clause> EmbeddedProver::start(const Problem& problem) {
  clauses_.clear();
  index_.clear();
  shapes_.clear();
  processed_.clear();
  is_processed_.clear();
  next_label_ = 1;
  for (const auto& clause : problem.clauses) {
    if (!index_.emplace(clause.label(), clauses_.size()).second) {
      throw BackendError(name(), "duplicate clause label '" + clause.label() + "'");
    }
    shapes_.emplace(shape_hash(clause.parsed_literals()), clauses_.size());
    clauses_.push_back(clause);
    is_processed_.push_back(false);
  }
  unprocessed_ = clauses_.size();
  return clauses_;
}

std::string EmbeddedProver::fresh_label() {
  std::string label;
  do {
    label = "c_" + std::to_string(next_label_++);
  } while (index_.count(label) > 0);
  return label;
}

bool EmbeddedProver::is_redundant(const Clause& candidate,
                                  const std::vector<Clause>& pending) const {
  const auto& literals = candidate.parsed_literals();
  if (is_tautology(literals)) return true;
  auto [first, last] = shapes_.equal_range(shape_hash(literals));
  for (auto it = first; it != last; ++it) {
    if (is_variant(literals, clauses_[it->second].parsed_literals())) return true;
  }
  for (const auto& other : pending) {
    if (shape_hash(other.parsed_literals()) == shape_hash(literals) &&
        is_variant(literals, other.parsed_literals())) {
      return true;
    }
  }
  return false;
}

SelectResult EmbeddedProver::select(const std::string& label) {
  auto found = index_.find(label);
  if (found == index_.end()) {
    throw BackendError(name(), "unknown clause label '" + label + "'");
  }
  const std::size_t given_index = found->second;
  if (is_processed_[given_index]) {
    throw BackendError(name(), "clause '" + label + "' was already processed");
  }
  const Clause given = clauses_[given_index];

  std::vector<Clause> candidates;
  std::size_t counter = 0;
  const auto given_literals = rename_apart(given.parsed_literals(), counter);
  for (std::size_t partner_index : processed_) {
    const Clause& partner = clauses_[partner_index];
    append_resolvents(given_literals,
                      rename_apart(partner.parsed_literals(), counter),
                      {given.label(), partner.label()}, candidates);
  }
  append_resolvents(given_literals,
                    rename_apart(given.parsed_literals(), counter),
                    {given.label(), given.label()}, candidates);
  for (auto& factor : factors(given)) candidates.push_back(std::move(factor));

  is_processed_[given_index] = true;
  processed_.push_back(given_index);
  --unprocessed_;

  SelectResult result;
  for (auto& candidate : candidates) {
    if (is_redundant(candidate, result.new_clauses)) continue;
    result.new_clauses.push_back(candidate.with_label(fresh_label()));
  }
  bool refuted = false;
  for (const auto& clause : result.new_clauses) {
    index_.emplace(clause.label(), clauses_.size());
    shapes_.emplace(shape_hash(clause.parsed_literals()), clauses_.size());
    clauses_.push_back(clause);
    is_processed_.push_back(false);
    ++unprocessed_;
    refuted = refuted || clause.is_empty();
  }
  if (refuted) {
    result.status = ProverStatus::kRefutation;
  } else if (unprocessed_ == 0) {
    result.status = ProverStatus::kSaturated;
  }
  return result;
}

}  // namespace satgym
