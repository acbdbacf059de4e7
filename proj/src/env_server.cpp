#include "satgym/env_server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <ostream>

#include "satgym/clause.hpp"
#include "satgym/line_io.hpp"
#include "satgym/log.hpp"

namespace satgym {

using json = nlohmann::json;

namespace {

// Malformed or unknown commands.
class BadCommand : public Error {
 public:
  using Error::Error;
};

class EnvironmentClosed : public Error {
 public:
  using Error::Error;
};

class NoEnvironment : public Error {
 public:
  using Error::Error;
};

std::string error_type(const std::exception& error) {
  if (dynamic_cast<const BadCommand*>(&error)) return "BadCommand";
  if (dynamic_cast<const EnvironmentClosed*>(&error)) return "EnvironmentClosed";
  if (dynamic_cast<const NoEnvironment*>(&error)) return "NoEnvironment";
  if (dynamic_cast<const InvalidActionError*>(&error)) return "InvalidAction";
  if (dynamic_cast<const EpisodeFinishedError*>(&error)) return "EpisodeFinished";
  if (dynamic_cast<const NotResetError*>(&error)) return "NotReset";
  if (dynamic_cast<const ParseError*>(&error)) return "ParseError";
  if (dynamic_cast<const TaskError*>(&error)) return "TaskError";
  if (dynamic_cast<const BackendError*>(&error)) return "BackendError";
  if (dynamic_cast<const ValidationError*>(&error)) return "ValidationError";
  if (dynamic_cast<const Error*>(&error)) return "Error";
  return "InternalError";
}

const json& require(const json& command, const char* field) {
  auto it = command.find(field);
  if (it == command.end()) throw BadCommand(std::string("missing field '") + field + "'");
  return *it;
}

std::uint64_t unsigned_field(const json& value, const char* field) {
  if (!value.is_number_unsigned()) {
    throw BadCommand(std::string("field '") + field + "' must be a non-negative integer");
  }
  return value.get<std::uint64_t>();
}

std::string string_field(const json& value, const char* field) {
  if (!value.is_string()) throw BadCommand(std::string("field '") + field + "' must be a string");
  return value.get<std::string>();
}

json info_json(const Info& info) {
  json object = json::object();
  for (const auto& [key, value] : info) object[key] = value;
  return object;
}

BackendSpec backend_from(const json& value, BackendSpec spec) {
  if (value.is_string()) {
    spec.kind = value.get<std::string>();
    return spec;
  }
  if (!value.is_object()) throw BadCommand("field 'backend' must be a string or an object");
  if (value.contains("kind")) spec.kind = string_field(value["kind"], "kind");
  if (value.contains("prover_command")) {
    const json& command = value["prover_command"];
    if (!command.is_array()) throw BadCommand("field 'prover_command' must be an array");
    spec.prover_command.clear();
    for (const auto& part : command) spec.prover_command.push_back(string_field(part, "prover_command"));
  }
  if (value.contains("relay_port")) {
    const auto port = unsigned_field(value["relay_port"], "relay_port");
    if (port > 65535) throw BadCommand("field 'relay_port' is out of range");
    spec.relay_port = static_cast<std::uint16_t>(port);
  }
  return spec;
}

}  // namespace

EnvServer::EnvServer(BackendSpec backend) : backend_(std::move(backend)) {}

EnvServer::~EnvServer() = default;

json EnvServer::observation_json(const Observation& observation) {
  json clauses = json::array();
  for (const auto& clause : observation.real_obs) clauses.push_back(render_clause(*clause, true));
  return {{"real_obs", std::move(clauses)}, {"action_mask", observation.action_mask}};
}

Environment& EnvServer::environment() {
  if (!env_) throw NoEnvironment("no environment; send make first");
  return *env_;
}

json EnvServer::dispatch(const json& command) {
  if (!command.is_object()) throw BadCommand("a command must be a JSON object");
  const std::string cmd = string_field(require(command, "cmd"), "cmd");

  if (cmd == "close") {
    if (env_) env_->close();
    closed_ = true;
    return json::object();
  }
  if (cmd != "make" && cmd != "set_task" && cmd != "reset" && cmd != "step" && cmd != "render") {
    throw BadCommand("unknown command '" + cmd + "'");
  }
  if (closed_) {
    fatal_ = true;
    throw EnvironmentClosed(cmd + " after close");
  }

  if (cmd == "make") {
    if (env_) throw BadCommand("the environment already exists; one per server process");
    EnvConfig config;
    if (command.contains("max_clauses")) {
      config.max_clauses = unsigned_field(command["max_clauses"], "max_clauses");
      if (config.max_clauses == 0) throw BadCommand("field 'max_clauses' must be positive");
    }
    if (command.contains("verbose_render")) {
      if (!command["verbose_render"].is_boolean()) {
        throw BadCommand("field 'verbose_render' must be a boolean");
      }
      config.verbose_render = command["verbose_render"].get<bool>();
    }
    if (command.contains("problem")) config.problem_path = string_field(command["problem"], "problem");
    BackendSpec spec = backend_;
    if (command.contains("backend")) spec = backend_from(command["backend"], spec);
    env_ = std::make_unique<Environment>(std::move(config), make_backend(spec));
    return {{"max_clauses", env_->max_clauses()}};
  }
  if (cmd == "set_task") {
    environment().set_task(string_field(require(command, "problem"), "problem"));
    return json::object();
  }
  if (cmd == "reset") {
    std::optional<std::uint64_t> seed;
    if (command.contains("seed") && !command["seed"].is_null()) {
      seed = unsigned_field(command["seed"], "seed");
    }
    auto [observation, info] = environment().reset(seed);
    return {{"observation", observation_json(observation)}, {"info", info_json(info)}};
  }
  if (cmd == "step") {
    const auto action = unsigned_field(require(command, "action"), "action");
    const StepOutcome outcome = environment().step(static_cast<std::size_t>(action));
    return {{"observation", observation_json(outcome.observation)},
            {"reward", outcome.reward},
            {"terminated", outcome.terminated},
            {"truncated", outcome.truncated},
            {"info", info_json(outcome.info)}};
  }
  // render
  std::string mode = "ansi";
  if (command.contains("mode")) mode = string_field(command["mode"], "mode");
  parse_render_mode(mode);
  // Human rendering would write onto the transport, so both modes return
  // the text.
  return {{"text", *environment().render(RenderMode::kAnsi)}};
}

std::string EnvServer::handle(std::string_view line) {
  json reply;
  json id;
  try {
    json command;
    try {
      command = json::parse(line);
    } catch (const json::parse_error& error) {
      throw BadCommand("malformed JSON at byte " + std::to_string(error.byte));
    }
    if (command.is_object() && command.contains("id")) id = command["id"];
    reply = dispatch(command);
    reply["ok"] = true;
  } catch (const std::exception& error) {
    reply = {{"ok", false}, {"error", {{"type", error_type(error)}, {"message", error.what()}}}};
    if (fatal_) reply["fatal"] = true;
  }
  if (!id.is_null()) reply["id"] = id;
  return reply.dump();
}

int serve_env(std::istream& in, std::ostream& out, BackendSpec backend) {
  EnvServer server(std::move(backend));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out << server.handle(line) << '\n' << std::flush;
    if (server.fatal()) return 2;
  }
  return 0;
}

int serve_env_socket(const std::string& host, std::uint16_t port, BackendSpec backend,
                     void (*on_listen)(std::uint16_t port)) {
  ignore_sigpipe();
  const int listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd < 0) throw Error(std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(listen_fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in address{};
  address.sin_family = AF_INET;
  address.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &address.sin_addr) != 1) {
    ::close(listen_fd);
    throw Error("not an IPv4 address: '" + host + "'");
  }
  if (::bind(listen_fd, reinterpret_cast<sockaddr*>(&address), sizeof address) != 0 ||
      ::listen(listen_fd, 1) != 0) {
    const std::string reason = std::strerror(errno);
    ::close(listen_fd);
    throw Error("cannot listen on " + host + ":" + std::to_string(port) + ": " + reason);
  }
  socklen_t length = sizeof address;
  ::getsockname(listen_fd, reinterpret_cast<sockaddr*>(&address), &length);
  if (on_listen != nullptr) on_listen(ntohs(address.sin_port));

  const int fd = ::accept(listen_fd, nullptr, nullptr);
  ::close(listen_fd);
  if (fd < 0) throw Error(std::string("accept: ") + std::strerror(errno));

  EnvServer server(std::move(backend));
  LineReader reader(fd);
  int code = 0;
  while (auto line = reader.read_line()) {
    if (line->empty()) continue;
    if (!write_all(fd, server.handle(*line) + "\n")) {
      log_warning("env client went away");
      break;
    }
    if (server.fatal()) {
      code = 2;
      break;
    }
  }
  ::close(fd);
  return code;
}

}  // namespace satgym
