#include "satgym/tptp.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "satgym/error.hpp"

namespace satgym {
namespace {

enum class TokenKind {
  kLowerWord,
  kUpperWord,
  kDollarWord,
  kSingleQuoted,
  kDistinctObject,
  kNumber,
  kLParen,
  kRParen,
  kLBracket,
  kRBracket,
  kComma,
  kDot,
  kPipe,
  kTilde,
  kEquals,
  kNotEquals,
  kOther,
  kEnd,
};

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t position;
};

bool is_alnum(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_lower_word(const std::string& s) {
  if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s) {
    if (!is_alnum(c)) return false;
  }
  return true;
}

bool is_integer(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '%') {
      while (i < n && text[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && text[i + 1] == '*') {
      const std::size_t start = i;
      const auto end = text.find("*/", i + 2);
      if (end == std::string_view::npos) {
        throw ParseError("unterminated block comment", start);
      }
      i = end + 2;
      continue;
    }
    const std::size_t start = i;
    auto word = [&](TokenKind kind) {
      ++i;
      while (i < n && is_alnum(text[i])) ++i;
      tokens.push_back({kind, std::string(text.substr(start, i - start)), start});
    };
    if (std::islower(static_cast<unsigned char>(c))) {
      word(TokenKind::kLowerWord);
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      word(TokenKind::kUpperWord);
    } else if (c == '$') {
      if (i + 1 < n && text[i + 1] == '$') ++i;
      if (i + 1 >= n || !std::islower(static_cast<unsigned char>(text[i + 1]))) {
        throw ParseError("malformed $-word", start);
      }
      ++i;
      word(TokenKind::kDollarWord);
    } else if (c == '\'' || c == '"') {
      std::string body;
      ++i;
      bool closed = false;
      while (i < n) {
        if (text[i] == '\\' && i + 1 < n) {
          body += text[i + 1];
          i += 2;
          continue;
        }
        if (text[i] == c) {
          closed = true;
          ++i;
          break;
        }
        body += text[i++];
      }
      if (!closed) throw ParseError("unterminated quoted token", start);
      if (c == '\'' && body.empty()) throw ParseError("empty quoted name", start);
      tokens.push_back({c == '\'' ? TokenKind::kSingleQuoted
                                  : TokenKind::kDistinctObject,
                        body, start});
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               ((c == '+' || c == '-') && i + 1 < n &&
                std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      ++i;
      while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      if (i + 1 < n && (text[i] == '.' || text[i] == '/') &&
          std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
        ++i;
        while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      }
      tokens.push_back(
          {TokenKind::kNumber, std::string(text.substr(start, i - start)), start});
    } else {
      TokenKind kind = TokenKind::kOther;
      std::size_t width = 1;
      switch (c) {
        case '(': kind = TokenKind::kLParen; break;
        case ')': kind = TokenKind::kRParen; break;
        case '[': kind = TokenKind::kLBracket; break;
        case ']': kind = TokenKind::kRBracket; break;
        case ',': kind = TokenKind::kComma; break;
        case '.': kind = TokenKind::kDot; break;
        case '|': kind = TokenKind::kPipe; break;
        case '~': kind = TokenKind::kTilde; break;
        case '=': kind = TokenKind::kEquals; break;
        case '!':
          if (i + 1 < n && text[i + 1] == '=') {
            kind = TokenKind::kNotEquals;
            width = 2;
          }
          break;
        default: break;
      }
      tokens.push_back({kind, std::string(text.substr(start, width)), start});
      i += width;
    }
  }
  tokens.push_back({TokenKind::kEnd, "", n});
  return tokens;
}

void check_balance(const std::vector<Token>& tokens) {
  std::vector<const Token*> open;
  for (const auto& token : tokens) {
    if (token.kind == TokenKind::kLParen || token.kind == TokenKind::kLBracket) {
      open.push_back(&token);
    } else if (token.kind == TokenKind::kRParen ||
               token.kind == TokenKind::kRBracket) {
      const auto expected = token.kind == TokenKind::kRParen
                                ? TokenKind::kLParen
                                : TokenKind::kLBracket;
      if (open.empty() || open.back()->kind != expected) {
        throw UnbalancedParenthesesError(
            "unbalanced parentheses: unexpected '" + token.text + "'",
            token.position);
      }
      open.pop_back();
    }
  }
  if (!open.empty()) {
    throw UnbalancedParenthesesError(
        "unbalanced parentheses: '" + open.back()->text + "' is never closed",
        open.back()->position);
  }
}

// Loosely typed annotation term: a functor with arguments, or a list.
struct GeneralTerm {
  std::string functor;
  bool is_list = false;
  std::vector<GeneralTerm> args;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t index = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[index];
  }
  bool at(TokenKind kind) const { return peek().kind == kind; }

  const Token& expect(TokenKind kind, const char* what) {
    if (!at(kind)) fail(std::string("expected ") + what);
    return tokens_[pos_++];
  }

  bool accept(TokenKind kind) {
    if (!at(kind)) return false;
    ++pos_;
    return true;
  }

  [[noreturn]] void fail(const std::string& message) const {
    const auto& token = peek();
    const std::string found =
        token.kind == TokenKind::kEnd ? "end of input" : "'" + token.text + "'";
    throw ParseError(message + ", found " + found, token.position);
  }

  // formula := '(' disjunction ')' | disjunction
  std::vector<Literal> formula() {
    if (at(TokenKind::kLParen)) {
      ++pos_;
      auto literals = disjunction();
      expect(TokenKind::kRParen, "')' closing the clause");
      return literals;
    }
    return disjunction();
  }

  std::vector<Literal> disjunction() {
    std::vector<Literal> literals;
    do {
      auto literal = this->literal();
      if (literal) literals.push_back(std::move(*literal));
    } while (accept(TokenKind::kPipe));
    return literals;
  }

  std::optional<Literal> literal() {
    bool negated = false;
    if (accept(TokenKind::kTilde)) {
      negated = true;
      if (accept(TokenKind::kLParen)) {
        Literal inner = atomic();
        expect(TokenKind::kRParen, "')' after negated atom");
        inner.negated = !inner.negated;
        return inner;
      }
    }
    Literal parsed = atomic();
    parsed.negated = parsed.negated != negated;
    // $false disjuncts contribute nothing to the clause.
    if (!parsed.negated && parsed.atom.is_constant() &&
        parsed.atom.name == "$false") {
      return std::nullopt;
    }
    return parsed;
  }

  Literal atomic() {
    const std::size_t start = peek().position;
    Term lhs = term();
    if (accept(TokenKind::kEquals)) {
      Term rhs = term();
      return {false, Term::function(kEqualitySymbol, {std::move(lhs), std::move(rhs)})};
    }
    if (accept(TokenKind::kNotEquals)) {
      Term rhs = term();
      return {true, Term::function(kEqualitySymbol, {std::move(lhs), std::move(rhs)})};
    }
    if (lhs.is_variable()) {
      throw ParseError("variable '" + lhs.name + "' used as an atom", start);
    }
    if (lhs.kind == Term::Kind::kFunction && !lhs.name.empty() &&
        (lhs.name[0] == '"' ||
         std::isdigit(static_cast<unsigned char>(lhs.name[0])) ||
         lhs.name[0] == '+' || lhs.name[0] == '-')) {
      throw ParseError("'" + lhs.name + "' cannot be used as an atom", start);
    }
    return {false, std::move(lhs)};
  }

  Term term() {
    const Token& token = peek();
    switch (token.kind) {
      case TokenKind::kUpperWord:
        ++pos_;
        return Term::variable(token.text);
      case TokenKind::kLowerWord:
      case TokenKind::kDollarWord:
      case TokenKind::kSingleQuoted: {
        ++pos_;
        std::string symbol = token.text;
        if (token.kind == TokenKind::kSingleQuoted && !is_lower_word(symbol)) {
          symbol = quote_name(symbol);
        }
        std::vector<Term> args;
        if (accept(TokenKind::kLParen)) {
          do {
            args.push_back(term());
          } while (accept(TokenKind::kComma));
          expect(TokenKind::kRParen, "')' or ',' in argument list");
        }
        return Term::function(std::move(symbol), std::move(args));
      }
      case TokenKind::kNumber:
        ++pos_;
        return Term::function(token.text);
      case TokenKind::kDistinctObject:
        ++pos_;
        return Term::function("\"" + token.text + "\"");
      default:
        fail("expected a term");
    }
  }

  std::string name() {
    const Token& token = peek();
    if (token.kind == TokenKind::kLowerWord || token.kind == TokenKind::kNumber ||
        token.kind == TokenKind::kSingleQuoted) {
      ++pos_;
      return token.text;
    }
    fail("expected a name");
  }

  GeneralTerm general_term() {
    GeneralTerm out;
    if (accept(TokenKind::kLBracket)) {
      out.is_list = true;
      if (!at(TokenKind::kRBracket)) {
        do {
          out.args.push_back(general_term());
        } while (accept(TokenKind::kComma));
      }
      expect(TokenKind::kRBracket, "']'");
      return out;
    }
    const Token& token = peek();
    switch (token.kind) {
      case TokenKind::kLowerWord:
      case TokenKind::kUpperWord:
      case TokenKind::kDollarWord:
      case TokenKind::kSingleQuoted:
      case TokenKind::kNumber:
      case TokenKind::kDistinctObject:
        ++pos_;
        out.functor = token.text;
        break;
      default:
        fail("expected an annotation term");
    }
    if (accept(TokenKind::kLParen)) {
      do {
        out.args.push_back(general_term());
      } while (accept(TokenKind::kComma));
      expect(TokenKind::kRParen, "')' in annotation");
    }
    return out;
  }

  Clause cnf_statement() {
    expect(TokenKind::kLParen, "'(' after cnf");
    std::string label = name();
    expect(TokenKind::kComma, "',' after name");
    const Token& role_token = expect(TokenKind::kLowerWord, "a role");
    std::string role = role_token.text;
    expect(TokenKind::kComma, "',' after role");
    auto literals = formula();
    std::string rule = default_input_rule(role);
    std::vector<std::string> parents;
    if (accept(TokenKind::kComma)) {
      GeneralTerm source = general_term();
      interpret_source(source, rule, parents);
      if (accept(TokenKind::kComma)) general_term();
    }
    expect(TokenKind::kRParen, "')' closing cnf statement");
    expect(TokenKind::kDot, "'.' ending the statement");
    return Clause(std::move(label), std::move(role), std::move(literals),
                  std::move(rule), std::move(parents));
  }

  std::size_t position() const { return pos_; }

 private:
  static void interpret_source(const GeneralTerm& source, std::string& rule,
                               std::vector<std::string>& parents) {
    if (source.functor != "inference" || source.args.empty()) return;
    rule = source.args[0].functor;
    if (source.args.size() >= 3 && source.args[2].is_list) {
      for (const auto& parent : source.args[2].args) {
        if (!parent.is_list && parent.args.empty()) {
          parents.push_back(parent.functor);
        } else if (!parent.is_list && !parent.args.empty() &&
                   parent.args.front().args.empty()) {
          // e.g. inference(...) nested sources or name(status) pairs
          parents.push_back(parent.args.front().functor);
        }
      }
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TaskError("cannot open problem file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::filesystem::path include_root(const std::filesystem::path& base_dir,
                                   const ProblemOptions& options) {
  if (options.axiom_root) return *options.axiom_root;
  if (const char* tptp = std::getenv("TPTP"); tptp != nullptr && *tptp != '\0') {
    return tptp;
  }
  return base_dir;
}

void parse_statements(std::string_view text, const std::filesystem::path& base_dir,
                      const ProblemOptions& options, int depth,
                      const std::set<std::string>* only,
                      std::vector<Clause>& out) {
  if (depth > 16) throw TaskError("include nesting too deep");
  auto tokens = tokenize(text);
  check_balance(tokens);
  Parser parser(std::move(tokens));
  while (!parser.at(TokenKind::kEnd)) {
    const Token& keyword = parser.peek();
    if (keyword.kind != TokenKind::kLowerWord) parser.fail("expected a statement");
    if (keyword.text == "cnf") {
      parser.expect(TokenKind::kLowerWord, "cnf");
      Clause clause = parser.cnf_statement();
      if (only == nullptr || only->count(clause.label()) > 0) {
        out.push_back(std::move(clause));
      }
    } else if (keyword.text == "include") {
      parser.expect(TokenKind::kLowerWord, "include");
      parser.expect(TokenKind::kLParen, "'(' after include");
      const Token& file = parser.expect(TokenKind::kSingleQuoted, "a quoted file name");
      std::optional<std::set<std::string>> selection;
      if (parser.accept(TokenKind::kComma)) {
        GeneralTerm names = parser.general_term();
        selection.emplace();
        for (const auto& item : names.args) selection->insert(item.functor);
      }
      parser.expect(TokenKind::kRParen, "')' closing include");
      parser.expect(TokenKind::kDot, "'.' ending the statement");
      const auto path = include_root(base_dir, options) / file.text;
      parse_statements(read_file(path), path.parent_path(), options, depth + 1,
                       selection ? &*selection : nullptr, out);
    } else {
      throw ParseError("unsupported statement '" + keyword.text +
                           "' (only cnf and include are accepted)",
                       keyword.position);
    }
  }
}

}  // namespace

std::vector<Literal> parse_clause(std::string_view text) {
  auto tokens = tokenize(text);
  check_balance(tokens);
  Parser parser(std::move(tokens));
  if (parser.at(TokenKind::kEnd)) parser.fail("expected a clause");
  auto literals = parser.formula();
  if (!parser.at(TokenKind::kEnd)) parser.fail("unexpected trailing input");
  return literals;
}

Clause parse_cnf_line(std::string_view text) {
  auto tokens = tokenize(text);
  check_balance(tokens);
  Parser parser(std::move(tokens));
  const Token& keyword = parser.expect(TokenKind::kLowerWord, "cnf");
  if (keyword.text != "cnf") {
    throw ParseError("expected a cnf statement", keyword.position);
  }
  Clause clause = parser.cnf_statement();
  if (!parser.at(TokenKind::kEnd)) parser.fail("unexpected trailing input");
  return clause;
}

std::string quote_name(const std::string& name) {
  if (is_lower_word(name) || is_integer(name)) return name;
  std::string out = "'";
  for (char c : name) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  out += '\'';
  return out;
}

Problem parse_problem(std::string_view text, const std::filesystem::path& base_dir,
                      const ProblemOptions& options) {
  Problem problem;
  parse_statements(text, base_dir, options, 0, nullptr, problem.clauses);
  std::set<std::string> labels;
  for (const auto& clause : problem.clauses) {
    if (!labels.insert(clause.label()).second) {
      throw TaskError("duplicate clause name '" + clause.label() + "'");
    }
  }
  return problem;
}

Problem load_problem(const std::filesystem::path& path,
                     const ProblemOptions& options) {
  if (!std::filesystem::is_regular_file(path)) {
    throw TaskError("problem file '" + path.string() + "' does not exist");
  }
  Problem problem = parse_problem(read_file(path), path.parent_path(), options);
  problem.path = std::filesystem::absolute(path);
  return problem;
}

}  // namespace satgym
