#include "satgym/term.hpp"

#include <algorithm>

namespace satgym {

Term Term::variable(std::string name) {
  return Term{Kind::kVariable, std::move(name), {}};
}

Term Term::function(std::string symbol, std::vector<Term> args) {
  return Term{Kind::kFunction, std::move(symbol), std::move(args)};
}

std::size_t Term::size() const {
  std::size_t total = 1;
  for (const auto& arg : args) total += arg.size();
  return total;
}

std::size_t Term::depth() const {
  std::size_t deepest = 0;
  for (const auto& arg : args) deepest = std::max(deepest, arg.depth());
  return deepest + 1;
}

bool is_equality(const Term& atom) {
  return atom.kind == Term::Kind::kFunction && atom.name == kEqualitySymbol &&
         atom.args.size() == 2;
}

void for_each_variable(const Term& term,
                       const std::function<void(const std::string&)>& visit) {
  if (term.is_variable()) {
    visit(term.name);
    return;
  }
  for (const auto& arg : term.args) for_each_variable(arg, visit);
}

bool occurs(const std::string& variable, const Term& term) {
  if (term.is_variable()) return term.name == variable;
  return std::any_of(term.args.begin(), term.args.end(),
                     [&](const Term& arg) { return occurs(variable, arg); });
}

Term rename_variables(
    const Term& term,
    const std::function<std::string(const std::string&)>& rename) {
  if (term.is_variable()) return Term::variable(rename(term.name));
  std::vector<Term> args;
  args.reserve(term.args.size());
  for (const auto& arg : term.args) args.push_back(rename_variables(arg, rename));
  return Term::function(term.name, std::move(args));
}

namespace {

void append(std::string& out, const Term& term) {
  if (is_equality(term)) {
    append(out, term.args[0]);
    out += " = ";
    append(out, term.args[1]);
    return;
  }
  out += term.name;
  if (term.args.empty()) return;
  out += '(';
  for (std::size_t i = 0; i < term.args.size(); ++i) {
    if (i > 0) out += ',';
    append(out, term.args[i]);
  }
  out += ')';
}

}  // namespace

std::string to_string(const Term& term) {
  std::string out;
  append(out, term);
  return out;
}

std::size_t hash_value(const Term& term) {
  std::size_t seed = std::hash<std::string>{}(term.name) ^
                     (term.is_variable() ? 0x9e3779b97f4a7c15ULL : 0);
  for (const auto& arg : term.args) {
    seed ^= hash_value(arg) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
  }
  return seed;
}

}  // namespace satgym
