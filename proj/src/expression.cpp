#include <cctype>
#include <cstdint>
#include <set>

#include "satgym/embedding.hpp"
#include "satgym/tptp.hpp"

namespace satgym {
namespace {

const std::set<std::string, std::less<>>& keywords() {
  static const std::set<std::string, std::less<>> words = {
      "False", "None",   "True",     "and",   "as",     "assert", "async",  "await",
      "break", "class",  "continue", "def",   "del",    "elif",   "else",   "except",
      "finally", "for",  "from",     "global", "if",    "import", "in",     "is",
      "lambda", "nonlocal", "not",   "or",    "pass",   "raise",  "return", "try",
      "while", "with",   "yield"};
  return words;
}

std::string variable_name(const std::string& name) {
  std::string out = "v_";
  for (std::size_t i = 0; i < name.size(); ++i) {
    const char c = name[i];
    if (i > 0 && std::isupper(static_cast<unsigned char>(c))) {
      out += '_';
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (c == '_') {
      out += "__";
    } else {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  return out;
}

std::string symbol_name(const std::string& name) {
  if (keywords().count(name) != 0) return name + "_";
  return name;
}

void append_term(const Term& term, std::string& out) {
  if (term.is_variable()) {
    out += variable_name(term.name);
    return;
  }
  out += symbol_name(term.name);
  if (term.args.empty()) return;
  out += '(';
  for (std::size_t i = 0; i < term.args.size(); ++i) {
    if (i > 0) out += ", ";
    append_term(term.args[i], out);
  }
  out += ')';
}

struct Token {
  enum class Kind { kName, kNumber, kOpen, kClose, kComma, kEq, kNe, kEnd };
  Kind kind;
  std::string text;
  std::size_t offset;
};

class ExpressionChecker {
 public:
  explicit ExpressionChecker(std::string_view text) : text_(text) {}

  std::optional<std::string> run() {
    if (!tokenize()) return error_;
    if (!expr()) return error_;
    if (peek().kind != Token::Kind::kEnd) return fail("unexpected '" + peek().text + "'");
    return std::nullopt;
  }

 private:
  bool tokenize() {
    std::size_t i = 0;
    while (i < text_.size()) {
      const char c = text_[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i;
        while (j < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[j])) || text_[j] == '_')) {
          ++j;
        }
        tokens_.push_back({Token::Kind::kName, std::string(text_.substr(i, j - i)), i});
        i = j;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t j = i;
        while (j < text_.size() && std::isdigit(static_cast<unsigned char>(text_[j]))) ++j;
        tokens_.push_back({Token::Kind::kNumber, std::string(text_.substr(i, j - i)), i});
        i = j;
      } else if (c == '(' || c == ')' || c == ',') {
        const auto kind = c == '(' ? Token::Kind::kOpen
                                   : (c == ')' ? Token::Kind::kClose : Token::Kind::kComma);
        tokens_.push_back({kind, std::string(1, c), i});
        ++i;
      } else if ((c == '=' || c == '!') && i + 1 < text_.size() && text_[i + 1] == '=') {
        tokens_.push_back({c == '=' ? Token::Kind::kEq : Token::Kind::kNe,
                           std::string(text_.substr(i, 2)), i});
        i += 2;
      } else {
        error_ = "unexpected character '" + std::string(1, c) + "' at offset " +
                 std::to_string(i);
        return false;
      }
    }
    tokens_.push_back({Token::Kind::kEnd, "end of input", text_.size()});
    return true;
  }

  const Token& peek() const { return tokens_[position_]; }
  bool is_word(const char* word) const {
    return peek().kind == Token::Kind::kName && peek().text == word;
  }
  std::optional<std::string> fail(const std::string& message) {
    error_ = message + " at offset " + std::to_string(peek().offset);
    return error_;
  }

  bool expr() {
    if (!negation()) return false;
    while (is_word("or")) {
      ++position_;
      if (!negation()) return false;
    }
    return true;
  }

  bool negation() {
    if (is_word("not")) {
      ++position_;
      return negation();
    }
    if (!term()) return false;
    if (peek().kind == Token::Kind::kEq || peek().kind == Token::Kind::kNe) {
      ++position_;
      return term();
    }
    return true;
  }

  bool term() {
    const Token& token = peek();
    if (token.kind == Token::Kind::kNumber) {
      ++position_;
      return true;
    }
    if (token.kind != Token::Kind::kName) {
      fail("expected a term, found '" + token.text + "'");
      return false;
    }
    if (token.text == "True" || token.text == "False") {
      ++position_;
      return true;
    }
    if (keywords().count(token.text) != 0) {
      fail("keyword '" + token.text + "' used as a name");
      return false;
    }
    ++position_;
    if (peek().kind != Token::Kind::kOpen) return true;
    ++position_;
    while (true) {
      if (!term()) return false;
      if (peek().kind == Token::Kind::kComma) {
        ++position_;
        continue;
      }
      if (peek().kind == Token::Kind::kClose) {
        ++position_;
        return true;
      }
      fail("expected ',' or ')'");
      return false;
    }
  }

  std::string_view text_;
  std::vector<Token> tokens_;
  std::size_t position_ = 0;
  std::string error_;
};

}  // namespace

std::string tptp_to_expr(std::span<const Literal> literals) {
  if (literals.empty()) return "False";
  std::string out;
  for (std::size_t i = 0; i < literals.size(); ++i) {
    if (i > 0) out += " or ";
    const Literal& literal = literals[i];
    if (is_equality(literal.atom)) {
      append_term(literal.atom.args[0], out);
      out += literal.negated ? " != " : " == ";
      append_term(literal.atom.args[1], out);
    } else {
      if (literal.negated) out += "not ";
      append_term(literal.atom, out);
    }
  }
  return out;
}

std::string tptp_to_expr(std::string_view literals) {
  const auto parsed = parse_clause(literals);
  return tptp_to_expr(std::span<const Literal>(parsed));
}

std::optional<std::string> validate_expression(std::string_view expression) {
  return ExpressionChecker(expression).run();
}

std::vector<double> stub_embedding(std::string_view expression, std::size_t dimension) {
  std::uint64_t state = 14695981039346656037ULL;
  for (const unsigned char c : expression) {
    state ^= c;
    state *= 1099511628211ULL;
  }
  std::vector<double> out(dimension);
  for (auto& value : out) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    value = static_cast<double>(z >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  }
  return out;
}

std::vector<double> EmbeddingEncoder::encode(const Clause& clause, std::size_t) {
  try {
    return embedder_.embed(tptp_to_expr(std::span<const Literal>(clause.parsed_literals())));
  } catch (const Error& e) {
    throw EmbeddingError("cannot embed clause '" + clause.label() + "': " + e.what());
  }
}

}  // namespace satgym
