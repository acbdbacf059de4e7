#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>

#include "json.hpp"

#include "satgym/environment.hpp"
#include "satgym/runner.hpp"

namespace satgym {

// Newline-delimited JSON command server around one Environment.
//
// Commands ("cmd" field; an optional "id" is echoed in the reply):
//   make      max_clauses?, problem?, verbose_render?, backend?  -> max_clauses
//   set_task  problem                                            -> {}
//   reset     seed?                                              -> observation, info
//   step      action                                             -> observation, reward,
//                                                                   terminated, truncated, info
//   render    mode? ("ansi" or "human")                          -> text
//   close                                                        -> {}
// Replies carry "ok": true, or "ok": false with error {type, message}.
// make must come first and only once. After close every command other than
// close is fatal: the reply has "fatal": true and the server stops.
class EnvServer {
 public:
  explicit EnvServer(BackendSpec backend = {});
  ~EnvServer();

  // Reply line (without newline) for one command line.
  std::string handle(std::string_view line);
  bool fatal() const { return fatal_; }

  // {"real_obs": [verbose cnf lines], "action_mask": [numbers]}
  static nlohmann::json observation_json(const Observation& observation);

 private:
  nlohmann::json dispatch(const nlohmann::json& command);
  Environment& environment();

  BackendSpec backend_;
  std::unique_ptr<Environment> env_;
  bool closed_ = false;
  bool fatal_ = false;
};

// Serves commands from `in` until end of input or a fatal error. Returns
// the process exit code: 0, or 2 after a fatal error.
int serve_env(std::istream& in, std::ostream& out, BackendSpec backend = {});

// Same protocol over one TCP connection accepted on host:port. `on_listen`
// receives the bound port before accepting.
int serve_env_socket(const std::string& host, std::uint16_t port, BackendSpec backend,
                     void (*on_listen)(std::uint16_t port) = nullptr);

}  // namespace satgym
