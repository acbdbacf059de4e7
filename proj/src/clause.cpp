#include "satgym/clause.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "satgym/tptp.hpp"

namespace satgym {

std::string to_string(const Literal& literal) {
  if (is_equality(literal.atom)) {
    return to_string(literal.atom.args[0]) + (literal.negated ? " != " : " = ") +
           to_string(literal.atom.args[1]);
  }
  return (literal.negated ? "~" : "") + to_string(literal.atom);
}

bool is_input_rule(const std::string& rule) {
  return rule == "axiom" || rule == "input" || rule == "assumption" ||
         rule == "negated_conjecture";
}

std::string default_input_rule(const std::string& role) {
  return role == "axiom" ? "axiom" : "input";
}

Clause::Clause(std::string label, std::string role, std::vector<Literal> literals,
               std::string inference_rule, std::vector<std::string> parents,
               std::size_t birth_step)
    : label_(std::move(label)),
      role_(std::move(role)),
      literals_(std::move(literals)),
      text_(render_literals(literals_)),
      inference_rule_(std::move(inference_rule)),
      parents_(std::move(parents)),
      birth_step_(birth_step) {}

Clause Clause::from_text(std::string label, std::string role,
                         const std::string& text, std::string inference_rule,
                         std::vector<std::string> parents,
                         std::size_t birth_step) {
  return Clause(std::move(label), std::move(role), parse_clause(text),
                std::move(inference_rule), std::move(parents), birth_step);
}

Clause Clause::with_birth_step(std::size_t step) const {
  Clause copy = *this;
  copy.birth_step_ = step;
  return copy;
}

Clause Clause::with_label(std::string label) const {
  Clause copy = *this;
  copy.label_ = std::move(label);
  return copy;
}

bool Clause::operator==(const Clause& other) const {
  return label_ == other.label_ && role_ == other.role_ &&
         literals_ == other.literals_ &&
         inference_rule_ == other.inference_rule_ &&
         parents_ == other.parents_ && birth_step_ == other.birth_step_;
}

std::string render_literals(std::span<const Literal> literals) {
  if (literals.empty()) return "$false";
  std::string out;
  for (std::size_t i = 0; i < literals.size(); ++i) {
    if (i > 0) out += " | ";
    out += to_string(literals[i]);
  }
  return out;
}

std::string render_clause(const Clause& clause, bool verbose) {
  if (!verbose) return clause.literals();
  std::string out = "cnf(" + quote_name(clause.label()) + ", " + clause.role() +
                    ", " + clause.literals();
  const bool annotate =
      !clause.inference_parents().empty() ||
      clause.inference_rule() != default_input_rule(clause.role());
  if (annotate) {
    out += ", inference(" + quote_name(clause.inference_rule()) + ", [], [";
    const auto& parents = clause.inference_parents();
    for (std::size_t i = 0; i < parents.size(); ++i) {
      if (i > 0) out += ", ";
      out += quote_name(parents[i]);
    }
    out += "])";
  }
  out += ").";
  return out;
}

std::size_t literals_weight(std::span<const Literal> literals) {
  std::size_t total = 0;
  for (const auto& literal : literals) total += literal.atom.size();
  return total;
}

std::size_t clause_weight(const Clause& clause) {
  return literals_weight(clause.parsed_literals());
}

bool is_tautology(std::span<const Literal> literals) {
  for (std::size_t i = 0; i < literals.size(); ++i) {
    for (std::size_t j = i + 1; j < literals.size(); ++j) {
      if (literals[i].negated != literals[j].negated &&
          literals[i].atom == literals[j].atom) {
        return true;
      }
    }
  }
  return false;
}

bool is_tautology(const Clause& clause) {
  return is_tautology(clause.parsed_literals());
}

namespace {

using Renaming = std::map<std::string, std::string>;

// Extends the bijection `forward`/`backward` so that `lhs` maps onto `rhs`.
bool match_renaming(const Term& lhs, const Term& rhs, Renaming& forward,
                    Renaming& backward) {
  if (lhs.kind != rhs.kind) return false;
  if (lhs.is_variable()) {
    auto f = forward.find(lhs.name);
    auto b = backward.find(rhs.name);
    if (f == forward.end() && b == backward.end()) {
      forward.emplace(lhs.name, rhs.name);
      backward.emplace(rhs.name, lhs.name);
      return true;
    }
    return f != forward.end() && b != backward.end() && f->second == rhs.name &&
           b->second == lhs.name;
  }
  if (lhs.name != rhs.name || lhs.args.size() != rhs.args.size()) return false;
  for (std::size_t i = 0; i < lhs.args.size(); ++i) {
    if (!match_renaming(lhs.args[i], rhs.args[i], forward, backward)) {
      return false;
    }
  }
  return true;
}

std::size_t mix(std::size_t seed, std::size_t value) {
  return seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

// Hash of `term` with each variable replaced by its color. Records every
// variable occurrence with its pre-order position.
std::size_t colored_hash(const Term& term,
                         const std::unordered_map<std::string, std::size_t>& colors,
                         std::size_t& position,
                         std::vector<std::pair<std::string, std::size_t>>* occurrences) {
  const std::size_t here = position++;
  if (term.is_variable()) {
    if (occurrences != nullptr) occurrences->emplace_back(term.name, here);
    auto it = colors.find(term.name);
    return mix(0x51ed27, it == colors.end() ? 0 : it->second);
  }
  std::size_t seed = std::hash<std::string>{}(term.name);
  for (const auto& arg : term.args) {
    seed = mix(seed, colored_hash(arg, colors, position, occurrences));
  }
  return seed;
}

// Per-literal signatures that are invariant under variable renaming. Starts
// from the variable-blind shape and refines variable colors by the contexts
// they occur in, so literals that cannot correspond in a variant get
// different signatures.
std::vector<std::size_t> literal_signatures(std::span<const Literal> literals) {
  std::unordered_map<std::string, std::size_t> colors;
  std::vector<std::size_t> signatures(literals.size());
  for (int round = 0; round < 3; ++round) {
    std::unordered_map<std::string, std::vector<std::size_t>> contexts;
    for (std::size_t i = 0; i < literals.size(); ++i) {
      std::vector<std::pair<std::string, std::size_t>> occurrences;
      std::size_t position = 0;
      signatures[i] = mix(colored_hash(literals[i].atom, colors, position, &occurrences),
                          literals[i].negated ? 1 : 2);
      for (const auto& [name, at] : occurrences) {
        contexts[name].push_back(mix(signatures[i], at));
      }
    }
    if (round == 2) break;
    std::unordered_map<std::string, std::size_t> next;
    for (auto& [name, items] : contexts) {
      std::sort(items.begin(), items.end());
      auto it = colors.find(name);
      std::size_t seed = it == colors.end() ? 0 : it->second;
      for (auto item : items) seed = mix(seed, item);
      next[name] = seed;
    }
    colors = std::move(next);
  }
  return signatures;
}

struct VariantSearch {
  std::span<const Literal> lhs;
  std::span<const Literal> rhs;
  std::vector<std::size_t> lhs_signatures;
  std::vector<std::size_t> rhs_signatures;
  std::vector<std::size_t> order;
  std::vector<bool> used;

  bool run(std::size_t next, const Renaming& forward, const Renaming& backward) {
    if (next == order.size()) return true;
    const std::size_t i = order[next];
    for (std::size_t j = 0; j < rhs.size(); ++j) {
      if (used[j] || rhs_signatures[j] != lhs_signatures[i]) continue;
      Renaming f = forward;
      Renaming b = backward;
      if (!match_renaming(lhs[i].atom, rhs[j].atom, f, b)) continue;
      used[j] = true;
      if (run(next + 1, f, b)) return true;
      used[j] = false;
    }
    return false;
  }
};

}  // namespace

bool is_variant(std::span<const Literal> lhs, std::span<const Literal> rhs) {
  if (lhs.size() != rhs.size()) return false;
  if (literals_weight(lhs) != literals_weight(rhs)) return false;
  VariantSearch search{lhs, rhs, literal_signatures(lhs), literal_signatures(rhs),
                       {}, std::vector<bool>(rhs.size(), false)};
  auto sorted_lhs = search.lhs_signatures;
  auto sorted_rhs = search.rhs_signatures;
  std::sort(sorted_lhs.begin(), sorted_lhs.end());
  std::sort(sorted_rhs.begin(), sorted_rhs.end());
  if (sorted_lhs != sorted_rhs) return false;
  // Literals with the rarest signature first keeps the branching low.
  std::unordered_map<std::size_t, std::size_t> frequency;
  for (auto sig : sorted_lhs) ++frequency[sig];
  search.order.resize(lhs.size());
  for (std::size_t i = 0; i < lhs.size(); ++i) search.order[i] = i;
  std::stable_sort(search.order.begin(), search.order.end(), [&](auto x, auto y) {
    return frequency[search.lhs_signatures[x]] < frequency[search.lhs_signatures[y]];
  });
  return search.run(0, {}, {});
}

std::vector<Literal> normalize_variables(std::span<const Literal> literals) {
  std::unordered_map<std::string, std::string> names;
  auto rename = [&names](const std::string& name) {
    auto [it, inserted] =
        names.try_emplace(name, "X" + std::to_string(names.size()));
    return it->second;
  };
  std::vector<Literal> out;
  out.reserve(literals.size());
  for (const auto& literal : literals) {
    out.push_back({literal.negated, rename_variables(literal.atom, rename)});
  }
  return out;
}

std::vector<Literal> remove_duplicate_literals(std::vector<Literal> literals) {
  std::vector<Literal> out;
  out.reserve(literals.size());
  for (auto& literal : literals) {
    if (std::find(out.begin(), out.end(), literal) == out.end()) {
      out.push_back(std::move(literal));
    }
  }
  return out;
}

std::size_t shape_hash(std::span<const Literal> literals) {
  auto parts = literal_signatures(literals);
  std::sort(parts.begin(), parts.end());
  std::size_t seed = literals.size();
  for (auto part : parts) seed = mix(seed, part);
  return seed;
}

}  // namespace satgym
