#include "satgym/stdio_adapter.hpp"

#include <sstream>

#include "satgym/error.hpp"
#include "satgym/tptp.hpp"

namespace satgym {

const char* to_string(LineClass line_class) {
  switch (line_class) {
    case LineClass::kNewClause: return "new-clause";
    case LineClass::kPrompt: return "given-clause-prompt";
    case LineClass::kRefutation: return "refutation-found";
    case LineClass::kSaturation: return "saturation";
    case LineClass::kIgnorable: return "ignorable";
  }
  return "unknown";
}

std::vector<LinePattern> default_line_patterns() {
  return {
      {LineClass::kRefutation, R"(% Refutation found\..*)"},
      {LineClass::kSaturation, R"(% (SZS status Satisfiable|Refutation not found).*)"},
      {LineClass::kPrompt, R"(Pick a given clause:\s*)"},
      {LineClass::kNewClause,
       R"(\[SA\] new: (\S+)\. (.+) \[([A-Za-z_]+)(?: ([^\]\s]+))?\](?: \{([a-z_]+)\})?)"},
      {LineClass::kIgnorable,
       R"(\s*|%|% (?!Refutation found|Refutation not found|SZS status Satisfiable).*)"
       R"(|\[SA\] (active|passive): .*)"},
  };
}

LineClassifier::LineClassifier(const std::vector<LinePattern>& patterns,
                               ClauseFields fields)
    : fields_(fields) {
  for (const auto& pattern : patterns) {
    try {
      patterns_.emplace_back(pattern.line_class,
                             std::regex(pattern.regex, std::regex::ECMAScript));
    } catch (const std::regex_error& e) {
      throw Error("invalid " + std::string(to_string(pattern.line_class)) +
                  " pattern '" + pattern.regex + "': " + e.what());
    }
  }
}

std::vector<LineClass> LineClassifier::matches(const std::string& line) const {
  std::vector<LineClass> out;
  for (const auto& [line_class, regex] : patterns_) {
    if (std::regex_match(line, regex)) out.push_back(line_class);
  }
  return out;
}

LineClass LineClassifier::classify(const std::string& line) const {
  for (const auto& [line_class, regex] : patterns_) {
    if (std::regex_match(line, regex)) return line_class;
  }
  throw ProtocolError("protocol desync: unclassifiable line \"" + line + "\"");
}

Clause LineClassifier::parse_new_clause(const std::string& line) const {
  for (const auto& [line_class, regex] : patterns_) {
    if (line_class != LineClass::kNewClause) continue;
    std::smatch m;
    if (!std::regex_match(line, m, regex)) continue;
    auto group = [&](int index) -> std::string {
      if (index <= 0 || static_cast<std::size_t>(index) >= m.size() || !m[index].matched) {
        return {};
      }
      return m[index].str();
    };
    std::vector<std::string> parents;
    std::stringstream list(group(fields_.parents));
    for (std::string parent; std::getline(list, parent, ',');) {
      if (!parent.empty()) parents.push_back(parent);
    }
    std::string rule = group(fields_.rule);
    if (rule.empty()) rule = parents.empty() ? "input" : "inference";
    std::string role = group(fields_.role);
    if (role.empty()) role = is_input_rule(rule) ? "axiom" : "plain";
    try {
      return Clause::from_text(group(fields_.label), role, group(fields_.literals),
                               rule, std::move(parents));
    } catch (const ParseError& e) {
      throw ProtocolError("unparseable clause in line \"" + line + "\": " + e.what());
    }
  }
  throw ProtocolError("not a new-clause line: \"" + line + "\"");
}

StdioAdapter::StdioAdapter(StdioAdapterConfig config)
    : config_(std::move(config)),
      classifier_(config_.line_patterns, config_.clause_fields) {}

StdioAdapter::~StdioAdapter() {
  try {
    stop();
  } catch (...) {
  }
}

void StdioAdapter::stop() {
  if (child_) {
    child_->terminate();
    child_.reset();
  }
  problem_file_.reset();
}

void StdioAdapter::fail_protocol(const std::string& message) {
  stop();
  throw ProtocolError(name() + ": " + message);
}

std::vector<Clause> StdioAdapter::start(const Problem& problem) {
  stop();
  finished_ = false;
  problem_file_ = std::make_unique<ProblemFile>(problem);
  const std::filesystem::path& path = problem_file_->path();
  std::vector<std::string> argv = {config_.executable_path};
  for (auto& arg : expand_command(config_.argument_template, {{"{problem}", path.string()}})) {
    argv.push_back(std::move(arg));
  }
  try {
    child_ = std::make_unique<Subprocess>(argv);
  } catch (const Error& e) {
    stop();
    throw BackendError(name(), e.what());
  }
  SelectResult initial = read_reply(true);
  if (initial.status != ProverStatus::kRunning) {
    stop();
    throw BackendError(name(), "prover finished before offering a given clause");
  }
  return std::move(initial.new_clauses);
}

SelectResult StdioAdapter::select(const std::string& label) {
  if (!child_ || finished_) {
    throw BackendDisconnectedError(name(), "no running prover");
  }
  if (!child_->write_line(label)) {
    stop();
    throw BackendDisconnectedError(name(), "prover stopped reading its input");
  }
  return read_reply(false);
}

SelectResult StdioAdapter::read_reply(bool starting) {
  SelectResult result;
  bool saw_empty = false;
  for (std::size_t lines = 0;; ++lines) {
    if (lines >= config_.prompt_line_budget) {
      fail_protocol("protocol desync: no prompt within " +
                    std::to_string(config_.prompt_line_budget) + " lines");
    }
    std::optional<std::string> line;
    try {
      line = child_->read_line(config_.read_timeout);
    } catch (const TimeoutError&) {
      stop();
      throw TimeoutError(name() + ": no reply from the prover within " +
                         std::to_string(config_.read_timeout.count()) + " ms");
    }
    if (!line) {
      stop();
      if (starting) throw BackendError(name(), "prover exited before the first prompt");
      throw BackendDisconnectedError(name(), "prover exited unexpectedly");
    }
    LineClass line_class;
    try {
      line_class = classifier_.classify(*line);
    } catch (const ProtocolError& e) {
      fail_protocol(e.what());
    }
    switch (line_class) {
      case LineClass::kIgnorable:
        break;
      case LineClass::kNewClause: {
        Clause clause = [&] {
          try {
            return classifier_.parse_new_clause(*line);
          } catch (const ProtocolError& e) {
            fail_protocol(e.what());
          }
        }();
        saw_empty = saw_empty || clause.is_empty();
        result.new_clauses.push_back(std::move(clause));
        break;
      }
      case LineClass::kPrompt:
        result.status = ProverStatus::kRunning;
        return result;
      case LineClass::kRefutation:
        if (!saw_empty) {
          // Some provers announce the refutation without printing $false.
          result.new_clauses.push_back(
              Clause("$false", "plain", {}, "refutation", {}));
        }
        result.status = ProverStatus::kRefutation;
        finished_ = true;
        child_->terminate();
        return result;
      case LineClass::kSaturation:
        result.status = ProverStatus::kSaturated;
        finished_ = true;
        child_->terminate();
        return result;
    }
  }
}

}  // namespace satgym
