#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "satgym/backend.hpp"
#include "satgym/error.hpp"
#include "satgym/problem_file.hpp"
#include "satgym/subprocess.hpp"
#include "satgym/tptp.hpp"

namespace satgym {

struct RelayMessage {
  enum class Kind { kRequest, kResponse };

  Kind kind = Kind::kRequest;
  std::uint64_t tag = 0;
  nlohmann::json payload;

  bool operator==(const RelayMessage& other) const = default;
};

// Framing-independent encoding of one message as one line (no newline).
class RelayCodec {
 public:
  virtual ~RelayCodec() = default;
  virtual std::string encode(const RelayMessage& message) const = 0;
  // Throws ProtocolError on malformed input.
  virtual RelayMessage decode(std::string_view line) const = 0;
};

// {"kind":"request","tag":7,"payload":{...}}
class JsonLinesCodec : public RelayCodec {
 public:
  std::string encode(const RelayMessage& message) const override;
  RelayMessage decode(std::string_view line) const override;
};

class TagMismatchError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

struct RelayServerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks a free port
  std::chrono::milliseconds accept_timeout{30000};
  std::shared_ptr<const RelayCodec> codec;  // JSON lines when unset
};

// TCP endpoint a prover connects to. The prover sends requests; the
// environment answers each with a response carrying the same tag. A reader
// and a writer thread move messages between the socket and two queues.
// At most one connection is live; accepting a new one drops the old.
class RelayServer {
 public:
  // Binds and listens immediately. Throws Error when binding fails.
  explicit RelayServer(RelayServerOptions options = {});
  ~RelayServer();

  RelayServer(const RelayServer&) = delete;
  RelayServer& operator=(const RelayServer&) = delete;

  std::uint16_t port() const { return port_; }
  const std::string& host() const { return options_.host; }

  // Waits for a prover connection. Throws TimeoutError.
  void accept_connection(std::optional<std::chrono::milliseconds> timeout = std::nullopt);
  bool connected() const;

  // Next request in arrival order. Throws BackendDisconnectedError once the
  // prover has gone and every received request was consumed, TimeoutError
  // on timeout.
  RelayMessage next_request(std::chrono::milliseconds timeout);

  // Queues a response. Its tag must be the oldest unanswered request tag,
  // otherwise TagMismatchError. BackendDisconnectedError without a prover.
  void post_response(RelayMessage message);

  void close_connection();

 private:
  struct Connection;

  RelayServerOptions options_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::unique_ptr<Connection> connection_;
};

// Prover side of the relay protocol.
class RelayClient {
 public:
  RelayClient(const std::string& host, std::uint16_t port,
              std::shared_ptr<const RelayCodec> codec = nullptr);
  ~RelayClient();

  RelayClient(const RelayClient&) = delete;
  RelayClient& operator=(const RelayClient&) = delete;

  // Sends a request with the next tag (1, 2, ...) and returns the tag.
  std::uint64_t send_request(const nlohmann::json& payload);
  // Throws BackendDisconnectedError when the server closed the connection.
  RelayMessage read_response(std::optional<std::chrono::milliseconds> timeout = std::nullopt);
  void close();

 private:
  int fd_ = -1;
  std::shared_ptr<const RelayCodec> codec_;
  std::unique_ptr<LineReader> reader_;
  std::uint64_t next_tag_ = 1;
};

// Request payload: {"clauses": [cnf lines], "eliminated": [labels],
// "status": "running" | "refutation" | "saturated"}.
// Response payload: {"given": label}.
nlohmann::json encode_select_result(const SelectResult& result);
SelectResult decode_select_result(const nlohmann::json& payload);

struct RelayBackendConfig {
  RelayServerOptions server;
  std::chrono::milliseconds read_timeout{10000};
  // Optional prover launched on each start(); "{problem}", "{host}" and
  // "{port}" are substituted. Empty: the prover is started by someone else.
  std::vector<std::string> prover_command;
};

class RelayBackend : public Backend {
 public:
  explicit RelayBackend(RelayBackendConfig config = {});
  ~RelayBackend() override;

  std::string name() const override { return "relay"; }
  std::vector<Clause> start(const Problem& problem) override;
  SelectResult select(const std::string& label) override;
  void stop() override;

  std::uint16_t port() const { return server_.port(); }

 private:
  SelectResult next_result();

  RelayBackendConfig config_;
  RelayServer server_;
  std::unique_ptr<ProblemFile> problem_file_;
  std::unique_ptr<Subprocess> prover_;
  std::uint64_t pending_tag_ = 0;
  bool finished_ = false;
};

// The embedded prover as a relay client for one episode: announces the
// input clauses, then applies each "given" response until the search ends
// or the server hangs up. `stop_after` quits silently after that many
// selections.
void run_relay_prover(const std::string& host, std::uint16_t port, const Problem& problem,
                      std::optional<std::size_t> stop_after = std::nullopt);

}  // namespace satgym
