#pragma once

#include <map>
#include <optional>
#include <string>

#include "satgym/clause.hpp"
#include "satgym/term.hpp"

namespace satgym {

// Variable bindings kept in solved form: no bound variable occurs in any
// image, so applying the substitution twice equals applying it once.
class Substitution {
 public:
  const Term* find(const std::string& variable) const;
  Term apply(const Term& term) const;
  Literal apply(const Literal& literal) const;

  // Adds variable -> image, composing it into the existing images. The caller
  // guarantees `variable` is unbound and absent from `image` after applying
  // this substitution.
  void bind(const std::string& variable, const Term& image);

  bool empty() const { return bindings_.empty(); }
  std::size_t size() const { return bindings_.size(); }
  const std::map<std::string, Term>& bindings() const { return bindings_; }

  bool operator==(const Substitution& other) const = default;

 private:
  std::map<std::string, Term> bindings_;
};

// Most general unifier with occurs check; nullopt when none exists.
std::optional<Substitution> unify(const Term& lhs, const Term& rhs);

using Matcher = std::map<std::string, Term>;

// One-way matching: extends `bindings` so that pattern instantiated by it
// equals `target`. Only variables of `pattern` are bound; images are taken
// verbatim from `target`.
bool match(const Term& pattern, const Term& target, Matcher& bindings);

}  // namespace satgym
