#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace satgym {

// A first-order term: either a variable or a function application.
// Constants are 0-ary functions. Atoms reuse this type with the predicate
// as the symbol; equality atoms use the symbol "=".
struct Term {
  enum class Kind { kVariable, kFunction };

  Kind kind = Kind::kFunction;
  std::string name;
  std::vector<Term> args;

  static Term variable(std::string name);
  static Term function(std::string symbol, std::vector<Term> args = {});

  bool is_variable() const { return kind == Kind::kVariable; }
  bool is_constant() const { return kind == Kind::kFunction && args.empty(); }
  std::size_t arity() const { return args.size(); }

  // Number of symbol occurrences (variables included).
  std::size_t size() const;
  std::size_t depth() const;

  bool operator==(const Term& other) const = default;
};

inline constexpr const char* kEqualitySymbol = "=";

bool is_equality(const Term& atom);

// Visits every variable occurrence in pre-order.
void for_each_variable(const Term& term,
                       const std::function<void(const std::string&)>& visit);

bool occurs(const std::string& variable, const Term& term);

// Applies `rename` to every variable name.
Term rename_variables(const Term& term,
                      const std::function<std::string(const std::string&)>& rename);

// TPTP text of a term, no spaces inside argument lists: f(X,g(a)).
std::string to_string(const Term& term);

std::size_t hash_value(const Term& term);

}  // namespace satgym
