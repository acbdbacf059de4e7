#include "satgym/unify.hpp"

#include <utility>
#include <vector>

namespace satgym {

const Term* Substitution::find(const std::string& variable) const {
  auto it = bindings_.find(variable);
  return it == bindings_.end() ? nullptr : &it->second;
}

Term Substitution::apply(const Term& term) const {
  if (term.is_variable()) {
    const Term* image = find(term.name);
    return image != nullptr ? *image : term;
  }
  std::vector<Term> args;
  args.reserve(term.args.size());
  for (const auto& arg : term.args) args.push_back(apply(arg));
  return Term::function(term.name, std::move(args));
}

Literal Substitution::apply(const Literal& literal) const {
  return {literal.negated, apply(literal.atom)};
}

namespace {

Term replace(const Term& term, const std::string& variable, const Term& image) {
  if (term.is_variable()) return term.name == variable ? image : term;
  std::vector<Term> args;
  args.reserve(term.args.size());
  for (const auto& arg : term.args) args.push_back(replace(arg, variable, image));
  return Term::function(term.name, std::move(args));
}

}  // namespace

void Substitution::bind(const std::string& variable, const Term& image) {
  for (auto& [name, bound] : bindings_) bound = replace(bound, variable, image);
  bindings_.insert_or_assign(variable, image);
}

std::optional<Substitution> unify(const Term& lhs, const Term& rhs) {
  Substitution sigma;
  std::vector<std::pair<Term, Term>> pending{{lhs, rhs}};
  while (!pending.empty()) {
    auto [s, t] = std::move(pending.back());
    pending.pop_back();
    s = sigma.apply(s);
    t = sigma.apply(t);
    if (s == t) continue;
    if (!s.is_variable() && t.is_variable()) std::swap(s, t);
    if (s.is_variable()) {
      if (occurs(s.name, t)) return std::nullopt;
      sigma.bind(s.name, t);
      continue;
    }
    if (s.name != t.name || s.args.size() != t.args.size()) return std::nullopt;
    for (std::size_t i = s.args.size(); i-- > 0;) {
      pending.emplace_back(std::move(s.args[i]), std::move(t.args[i]));
    }
  }
  return sigma;
}

bool match(const Term& pattern, const Term& target, Matcher& bindings) {
  if (pattern.is_variable()) {
    auto [it, inserted] = bindings.try_emplace(pattern.name, target);
    return inserted || it->second == target;
  }
  if (target.is_variable() || pattern.name != target.name ||
      pattern.args.size() != target.args.size()) {
    return false;
  }
  for (std::size_t i = 0; i < pattern.args.size(); ++i) {
    if (!match(pattern.args[i], target.args[i], bindings)) return false;
  }
  return true;
}

}  // namespace satgym
