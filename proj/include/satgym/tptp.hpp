#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "satgym/clause.hpp"

namespace satgym {

// Parses a TPTP CNF disjunction such as "member(X0,bb) | ~member(X0,b)".
// "$false" yields no literals; "!=" becomes a negated "=" atom.
// Throws UnbalancedParenthesesError or ParseError with a byte offset.
std::vector<Literal> parse_clause(std::string_view text);

// Parses one `cnf(name, role, formula[, annotation...]).` statement.
Clause parse_cnf_line(std::string_view text);

// TPTP name as written in a statement: bare when it is a lower word or an
// integer, single-quoted otherwise.
std::string quote_name(const std::string& name);

struct Problem {
  // Empty for problems that did not come from a file.
  std::filesystem::path path;
  std::vector<Clause> clauses;
};

struct ProblemOptions {
  // Directory `include('...')` paths are resolved against. When unset the
  // TPTP environment variable is used, then the problem's own directory.
  std::optional<std::filesystem::path> axiom_root;
};

// Reads a problem file. Accepts cnf statements and include directives only.
Problem load_problem(const std::filesystem::path& path,
                     const ProblemOptions& options = {});

// Same grammar as load_problem, for in-memory text. Includes are resolved
// against `base_dir`.
Problem parse_problem(std::string_view text,
                      const std::filesystem::path& base_dir = {},
                      const ProblemOptions& options = {});

}  // namespace satgym
