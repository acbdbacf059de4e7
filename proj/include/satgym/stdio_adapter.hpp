#pragma once

#include <chrono>
#include <memory>
#include <regex>
#include <string>
#include <vector>

#include "satgym/backend.hpp"
#include "satgym/problem_file.hpp"
#include "satgym/subprocess.hpp"

namespace satgym {

// What a line of prover output means to the adapter.
enum class LineClass { kNewClause, kPrompt, kRefutation, kSaturation, kIgnorable };

const char* to_string(LineClass line_class);

struct LinePattern {
  LineClass line_class;
  std::string regex;  // ECMAScript syntax, matched against the whole line
};

// Capture group numbers inside the new-clause pattern. 0 means absent.
struct ClauseFields {
  int label = 1;
  int literals = 2;
  int rule = 3;
  int parents = 4;  // comma-separated labels
  int role = 5;
};

// Default grammar, pinned by the golden transcripts:
//   [SA] new: <label>. <literals> [<rule>[ <p1>,<p2>]][ {<role>}]
//   Pick a given clause:
//   % Refutation found. ...
//   % SZS status Satisfiable ...   or   % Refutation not found ...
// Other lines starting with '%', blank lines and "[SA] active:" or
// "[SA] passive:" lines are ignorable.
std::vector<LinePattern> default_line_patterns();

class LineClassifier {
 public:
  LineClassifier(const std::vector<LinePattern>& patterns, ClauseFields fields = {});

  // Every class whose pattern matches `line`, in pattern order.
  std::vector<LineClass> matches(const std::string& line) const;
  // First matching class; throws ProtocolError quoting the line when none
  // matches.
  LineClass classify(const std::string& line) const;
  // Parses a new-clause line. Throws ProtocolError when it does not match or
  // its literals do not parse.
  Clause parse_new_clause(const std::string& line) const;

 private:
  std::vector<std::pair<LineClass, std::regex>> patterns_;
  ClauseFields fields_;
};

struct StdioAdapterConfig {
  std::string executable_path;
  // Arguments after the executable; "{problem}" is replaced by the problem
  // file path.
  std::vector<std::string> argument_template = {"{problem}"};
  std::vector<LinePattern> line_patterns = default_line_patterns();
  ClauseFields clause_fields;
  std::chrono::milliseconds read_timeout{10000};
  // Lines read without reaching a prompt or terminal line before the
  // adapter declares the protocol out of sync.
  std::size_t prompt_line_budget = 100000;
};

// Drives an interactive prover over its standard streams: the prover prints
// clauses and a prompt, the adapter answers with the label of the next given
// clause.
class StdioAdapter : public Backend {
 public:
  explicit StdioAdapter(StdioAdapterConfig config);
  ~StdioAdapter() override;

  std::string name() const override { return "stdio"; }
  std::vector<Clause> start(const Problem& problem) override;
  SelectResult select(const std::string& label) override;
  void stop() override;

  const StdioAdapterConfig& config() const { return config_; }

 private:
  // Reads until a prompt or a terminal line.
  SelectResult read_reply(bool starting);
  [[noreturn]] void fail_protocol(const std::string& message);

  StdioAdapterConfig config_;
  LineClassifier classifier_;
  std::unique_ptr<Subprocess> child_;
  std::unique_ptr<ProblemFile> problem_file_;
  bool finished_ = false;
};

}  // namespace satgym
