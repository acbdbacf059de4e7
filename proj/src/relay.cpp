#include "satgym/relay.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

#include "satgym/blocking_queue.hpp"
#include "satgym/embedded_prover.hpp"
#include "satgym/line_io.hpp"
#include "satgym/log.hpp"
#include "satgym/tptp.hpp"

namespace satgym {
namespace {

const char* kind_name(RelayMessage::Kind kind) {
  return kind == RelayMessage::Kind::kRequest ? "request" : "response";
}

std::shared_ptr<const RelayCodec> codec_or_default(std::shared_ptr<const RelayCodec> codec) {
  if (codec) return codec;
  return std::make_shared<JsonLinesCodec>();
}

addrinfo* resolve(const std::string& host, std::uint16_t port, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* result = nullptr;
  const int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(),
                               std::to_string(port).c_str(), &hints, &result);
  if (rc != 0) throw Error("cannot resolve '" + host + "': " + ::gai_strerror(rc));
  return result;
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

}  // namespace

std::string JsonLinesCodec::encode(const RelayMessage& message) const {
  nlohmann::json record = {{"kind", kind_name(message.kind)},
                           {"tag", message.tag},
                           {"payload", message.payload}};
  return record.dump();
}

RelayMessage JsonLinesCodec::decode(std::string_view line) const {
  nlohmann::json record;
  try {
    record = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError("malformed relay record: " + std::string(e.what()));
  }
  if (!record.is_object() || !record.contains("kind") || !record["kind"].is_string() ||
      !record.contains("tag") || !record["tag"].is_number_unsigned()) {
    throw ProtocolError("relay record needs string 'kind' and unsigned 'tag': " +
                        std::string(line));
  }
  RelayMessage message;
  const std::string kind = record["kind"];
  if (kind == "request") {
    message.kind = RelayMessage::Kind::kRequest;
  } else if (kind == "response") {
    message.kind = RelayMessage::Kind::kResponse;
  } else {
    throw ProtocolError("unknown relay record kind '" + kind + "'");
  }
  message.tag = record["tag"].get<std::uint64_t>();
  if (record.contains("payload")) message.payload = record["payload"];
  return message;
}

struct RelayServer::Connection {
  int fd;
  std::shared_ptr<const RelayCodec> codec;
  BlockingQueue<RelayMessage> requests;
  BlockingQueue<std::string> responses;
  std::mutex mutex;
  std::deque<std::uint64_t> outstanding;
  std::uint64_t last_tag = 0;
  std::atomic<bool> alive{true};
  std::thread reader;
  std::thread writer;

  Connection(int socket, std::shared_ptr<const RelayCodec> line_codec)
      : fd(socket), codec(std::move(line_codec)) {
    reader = std::thread([this] { read_loop(); });
    writer = std::thread([this] { write_loop(); });
  }

  ~Connection() {
    ::shutdown(fd, SHUT_RDWR);
    responses.close();
    reader.join();
    writer.join();
    ::close(fd);
  }

  void read_loop() {
    LineReader in(fd);
    try {
      while (auto line = in.read_line()) {
        if (line->empty()) continue;
        RelayMessage message = codec->decode(*line);
        if (message.kind != RelayMessage::Kind::kRequest) {
          throw ProtocolError("prover sent a response record");
        }
        {
          std::lock_guard lock(mutex);
          if (message.tag <= last_tag) {
            throw ProtocolError("request tag " + std::to_string(message.tag) +
                                " does not increase (last " + std::to_string(last_tag) + ")");
          }
          last_tag = message.tag;
          outstanding.push_back(message.tag);
        }
        requests.push(std::move(message));
      }
    } catch (const std::exception& e) {
      log_error(std::string("relay: ") + e.what() + "; dropping the connection");
    }
    alive = false;
    requests.close();
    responses.close();
  }

  void write_loop() {
    while (auto line = responses.pop()) {
      if (!write_all(fd, *line + "\n")) {
        alive = false;
        break;
      }
    }
  }
};

RelayServer::RelayServer(RelayServerOptions options) : options_(std::move(options)) {
  options_.codec = codec_or_default(options_.codec);
  ignore_sigpipe();
  addrinfo* address = resolve(options_.host, options_.port, true);
  listen_fd_ = ::socket(address->ai_family, address->ai_socktype | SOCK_CLOEXEC,
                        address->ai_protocol);
  if (listen_fd_ < 0) {
    ::freeaddrinfo(address);
    throw Error(std::string("socket failed: ") + std::strerror(errno));
  }
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  const bool bound = ::bind(listen_fd_, address->ai_addr, address->ai_addrlen) == 0;
  const int bind_errno = errno;
  ::freeaddrinfo(address);
  if (!bound || ::listen(listen_fd_, 4) != 0) {
    ::close(listen_fd_);
    throw Error("cannot listen on " + options_.host + ":" + std::to_string(options_.port) +
                ": " + std::strerror(bound ? errno : bind_errno));
  }
  sockaddr_in actual{};
  socklen_t length = sizeof actual;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&actual), &length);
  port_ = ntohs(actual.sin_port);
}

RelayServer::~RelayServer() {
  close_connection();
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void RelayServer::accept_connection(std::optional<std::chrono::milliseconds> timeout) {
  close_connection();
  const auto deadline = timeout ? std::chrono::steady_clock::now() + *timeout
                                : std::chrono::steady_clock::time_point::max();
  while (true) {
    int wait_ms = -1;
    if (timeout) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) {
        throw TimeoutError("no prover connected to port " + std::to_string(port_) +
                           " within " + std::to_string(timeout->count()) + " ms");
      }
      wait_ms = static_cast<int>(left.count());
    }
    pollfd pfd{listen_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, wait_ms);
    if (ready < 0 && errno != EINTR) {
      throw Error(std::string("poll failed: ") + std::strerror(errno));
    }
    if (ready <= 0) continue;
    const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
      if (errno == EINTR || errno == EAGAIN || errno == ECONNABORTED) continue;
      throw Error(std::string("accept failed: ") + std::strerror(errno));
    }
    set_nodelay(fd);
    connection_ = std::make_unique<Connection>(fd, options_.codec);
    return;
  }
}

bool RelayServer::connected() const { return connection_ && connection_->alive; }

RelayMessage RelayServer::next_request(std::chrono::milliseconds timeout) {
  if (!connection_) throw BackendDisconnectedError("relay", "no prover connected");
  if (auto message = connection_->requests.pop(timeout)) return std::move(*message);
  if (connection_->requests.closed()) {
    throw BackendDisconnectedError("relay", "prover disconnected");
  }
  throw TimeoutError("relay: no request within " + std::to_string(timeout.count()) + " ms");
}

void RelayServer::post_response(RelayMessage message) {
  if (!connection_) throw BackendDisconnectedError("relay", "no prover connected");
  message.kind = RelayMessage::Kind::kResponse;
  {
    std::lock_guard lock(connection_->mutex);
    auto& outstanding = connection_->outstanding;
    if (outstanding.empty()) {
      throw TagMismatchError("response tag " + std::to_string(message.tag) +
                             " but no request is pending");
    }
    if (outstanding.front() != message.tag) {
      throw TagMismatchError("response tag " + std::to_string(message.tag) +
                             " does not match pending request tag " +
                             std::to_string(outstanding.front()));
    }
    outstanding.pop_front();
  }
  if (!connection_->alive ||
      !connection_->responses.push(options_.codec->encode(message))) {
    throw BackendDisconnectedError("relay", "prover disconnected");
  }
}

void RelayServer::close_connection() { connection_.reset(); }

RelayClient::RelayClient(const std::string& host, std::uint16_t port,
                         std::shared_ptr<const RelayCodec> codec)
    : codec_(codec_or_default(std::move(codec))) {
  ignore_sigpipe();
  addrinfo* address = resolve(host, port, false);
  fd_ = ::socket(address->ai_family, address->ai_socktype | SOCK_CLOEXEC,
                 address->ai_protocol);
  const bool connected =
      fd_ >= 0 && ::connect(fd_, address->ai_addr, address->ai_addrlen) == 0;
  const int connect_errno = errno;
  ::freeaddrinfo(address);
  if (!connected) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
    throw Error("cannot connect to " + host + ":" + std::to_string(port) + ": " +
                std::strerror(connect_errno));
  }
  set_nodelay(fd_);
  reader_ = std::make_unique<LineReader>(fd_);
}

RelayClient::~RelayClient() { close(); }

std::uint64_t RelayClient::send_request(const nlohmann::json& payload) {
  const std::uint64_t tag = next_tag_++;
  RelayMessage message{RelayMessage::Kind::kRequest, tag, payload};
  if (fd_ < 0 || !write_all(fd_, codec_->encode(message) + "\n")) {
    throw BackendDisconnectedError("relay-client", "server closed the connection");
  }
  return tag;
}

RelayMessage RelayClient::read_response(std::optional<std::chrono::milliseconds> timeout) {
  if (!reader_) throw BackendDisconnectedError("relay-client", "not connected");
  auto line = reader_->read_line(timeout);
  if (!line) throw BackendDisconnectedError("relay-client", "server closed the connection");
  RelayMessage message = codec_->decode(*line);
  if (message.kind != RelayMessage::Kind::kResponse) {
    throw ProtocolError("server sent a request record");
  }
  return message;
}

void RelayClient::close() {
  reader_.reset();
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
}

nlohmann::json encode_select_result(const SelectResult& result) {
  nlohmann::json clauses = nlohmann::json::array();
  for (const auto& clause : result.new_clauses) clauses.push_back(render_clause(clause, true));
  return {{"clauses", clauses},
          {"eliminated", result.eliminated_labels},
          {"status", to_string(result.status)}};
}

SelectResult decode_select_result(const nlohmann::json& payload) {
  SelectResult result;
  try {
    for (const auto& line : payload.at("clauses")) {
      result.new_clauses.push_back(parse_cnf_line(line.get<std::string>()));
    }
    if (payload.contains("eliminated")) {
      result.eliminated_labels = payload["eliminated"].get<std::vector<std::string>>();
    }
    const std::string status = payload.value("status", "running");
    if (status == "running") {
      result.status = ProverStatus::kRunning;
    } else if (status == "refutation") {
      result.status = ProverStatus::kRefutation;
    } else if (status == "saturated") {
      result.status = ProverStatus::kSaturated;
    } else {
      throw ProtocolError("unknown prover status '" + status + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed request payload: ") + e.what());
  } catch (const ParseError& e) {
    throw ProtocolError(std::string("unparseable clause in request: ") + e.what());
  }
  return result;
}

RelayBackend::RelayBackend(RelayBackendConfig config)
    : config_(std::move(config)), server_(config_.server) {}

RelayBackend::~RelayBackend() {
  try {
    stop();
  } catch (...) {
  }
}

void RelayBackend::stop() {
  server_.close_connection();
  if (prover_) {
    prover_->terminate();
    prover_.reset();
  }
  problem_file_.reset();
  pending_tag_ = 0;
}

std::vector<Clause> RelayBackend::start(const Problem& problem) {
  stop();
  finished_ = false;
  if (!config_.prover_command.empty()) {
    problem_file_ = std::make_unique<ProblemFile>(problem);
    const auto argv = expand_command(config_.prover_command,
                                     {{"{problem}", problem_file_->path().string()},
                                      {"{host}", server_.host()},
                                      {"{port}", std::to_string(server_.port())}});
    try {
      prover_ = std::make_unique<Subprocess>(argv, false);
    } catch (const Error& e) {
      stop();
      throw BackendError(name(), e.what());
    }
  }
  try {
    server_.accept_connection(config_.server.accept_timeout);
  } catch (const TimeoutError& e) {
    stop();
    throw BackendError(name(), e.what());
  }
  SelectResult initial;
  try {
    initial = next_result();
  } catch (const Error& e) {
    stop();
    throw BackendError(name(), std::string("no initial state from the prover: ") + e.what());
  }
  if (initial.status != ProverStatus::kRunning) {
    stop();
    throw BackendError(name(), "prover finished before offering a given clause");
  }
  return std::move(initial.new_clauses);
}

SelectResult RelayBackend::next_result() {
  RelayMessage request = server_.next_request(config_.read_timeout);
  pending_tag_ = request.tag;
  return decode_select_result(request.payload);
}

SelectResult RelayBackend::select(const std::string& label) {
  if (finished_ || pending_tag_ == 0) {
    throw BackendDisconnectedError(name(), "no pending prover request");
  }
  server_.post_response({RelayMessage::Kind::kResponse, pending_tag_, {{"given", label}}});
  SelectResult result = next_result();
  if (result.status != ProverStatus::kRunning) finished_ = true;
  return result;
}

void run_relay_prover(const std::string& host, std::uint16_t port, const Problem& problem,
                      std::optional<std::size_t> stop_after) {
  EmbeddedProver prover;
  RelayClient client(host, port);
  SelectResult state;
  state.new_clauses = prover.start(problem);
  std::size_t selections = 0;
  while (true) {
    client.send_request(encode_select_result(state));
    if (state.status != ProverStatus::kRunning) return;
    RelayMessage response;
    try {
      response = client.read_response();
    } catch (const BackendDisconnectedError&) {
      return;
    }
    if (stop_after && selections++ >= *stop_after) return;
    const auto& given = response.payload.find("given");
    if (given == response.payload.end() || !given->is_string()) {
      throw ProtocolError("response payload has no 'given' label");
    }
    state = prover.select(given->get<std::string>());
  }
}

}  // namespace satgym
