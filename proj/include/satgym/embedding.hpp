#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "satgym/clause.hpp"
#include "satgym/error.hpp"
#include "satgym/wrappers.hpp"

namespace httplib {
class Client;
class Server;
}  // namespace httplib

namespace satgym {

// Rewrites a clause into the boolean expression dialect understood by the
// embedding service:
//   |  -> or        ~  -> not        =  -> ==       != -> !=
//   $false -> False
//   variable X1 -> v_x1 (later capitals become "_" plus the lower letter and
//   "_" is doubled, so distinct variables stay distinct)
//   symbols that are dialect keywords get a trailing "_"
// Applications keep call syntax with ", " between arguments.
std::string tptp_to_expr(std::span<const Literal> literals);
// Parses `literals` first; throws ParseError.
std::string tptp_to_expr(std::string_view literals);

// Checks `expression` against the dialect grammar:
//   expr  := neg ("or" neg)*
//   neg   := "not" neg | cmp
//   cmp   := term (("==" | "!=") term)?
//   term  := "True" | "False" | digits | name ["(" term ("," term)* ")"]
// Returns the first error, or nullopt when it conforms.
std::optional<std::string> validate_expression(std::string_view expression);

// Deterministic stand-in for a learned encoder: FNV-1a over the expression
// bytes seeds a splitmix64 stream, and each output is the top 53 bits of
// the next draw scaled to [-1, 1).
std::vector<double> stub_embedding(std::string_view expression, std::size_t dimension);

class EmbeddingError : public Error {
 public:
  using Error::Error;
};

struct LatencyStats {
  std::size_t count = 0;  // embed() calls
  std::size_t hits = 0;   // calls answered from the cache
  double mean_ms = 0.0;
  double max_ms = 0.0;
  double hit_mean_ms = 0.0;
  double miss_mean_ms = 0.0;

  double hit_ratio() const { return count == 0 ? 0.0 : static_cast<double>(hits) / count; }
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<double> embed(const std::string& expression) = 0;
};

inline constexpr std::size_t kDefaultEmbeddingDimension = 256;
inline constexpr const char* kEmbedderUrlVariable = "SATGYM_EMBEDDER_URL";
inline constexpr const char* kDefaultEmbedderUrl = "http://127.0.0.1:8765/embed";

struct HttpEmbedderConfig {
  // Unset: $SATGYM_EMBEDDER_URL, then kDefaultEmbedderUrl.
  std::optional<std::string> url;
  std::size_t dimension = kDefaultEmbeddingDimension;
  int retries = 3;
  std::chrono::milliseconds backoff_base{50};
  std::chrono::milliseconds request_timeout{5000};
  bool cache = true;
};

// Client of the HTTP embedding service: POST {"expression": e} and expect
// {"vector": [d numbers]}. Results are cached by expression text; concurrent
// requests for one expression share a single fetch. Safe for concurrent use.
class HttpEmbedder : public Embedder {
 public:
  explicit HttpEmbedder(HttpEmbedderConfig config = {});
  ~HttpEmbedder() override;

  std::size_t dimension() const override { return config_.dimension; }
  // Throws EmbeddingError after the retries are spent or when the service
  // rejects the expression, ProtocolError on a malformed reply.
  std::vector<double> embed(const std::string& expression) override;

  const std::string& url() const { return url_; }
  LatencyStats stats() const;
  std::size_t network_requests() const;

 private:
  using Vector = std::vector<double>;

  Vector fetch(const std::string& expression);
  Vector fetch_once(const std::string& expression);
  void record(double ms, bool hit);

  HttpEmbedderConfig config_;
  std::string url_;
  std::string path_;
  std::unique_ptr<httplib::Client> client_;
  std::mutex client_mutex_;

  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::shared_future<Vector>> cache_;
  LatencyStats stats_;
  double hit_total_ms_ = 0.0;
  double miss_total_ms_ = 0.0;
  std::size_t network_requests_ = 0;
};

// Row encoder for EncodedObservation: the embedding of tptp_to_expr of the
// clause.
class EmbeddingEncoder : public ClauseEncoder {
 public:
  explicit EmbeddingEncoder(Embedder& embedder) : embedder_(embedder) {}

  std::size_t dimension() const override { return embedder_.dimension(); }
  // Errors name the clause label.
  std::vector<double> encode(const Clause& clause, std::size_t step_count) override;

 private:
  Embedder& embedder_;
};

// Loopback HTTP service answering with stub_embedding. Requests that fail
// validate_expression get status 400.
class StubEmbeddingService {
 public:
  explicit StubEmbeddingService(std::size_t dimension = kDefaultEmbeddingDimension,
                                std::string host = "127.0.0.1", std::uint16_t port = 0);
  ~StubEmbeddingService();

  StubEmbeddingService(const StubEmbeddingService&) = delete;
  StubEmbeddingService& operator=(const StubEmbeddingService&) = delete;

  std::uint16_t port() const { return port_; }
  std::string url() const;
  std::size_t requests() const;

  // The next `count` requests get status 503.
  void fail_next(std::size_t count);

  // Blocks serving requests until stop() from another thread.
  void serve();
  // Serves on a background thread.
  void start();
  void stop();

 private:
  std::size_t dimension_;
  std::string host_;
  std::uint16_t port_ = 0;
  std::unique_ptr<httplib::Server> server_;
  std::unique_ptr<std::thread> thread_;
  mutable std::mutex mutex_;
  std::size_t requests_ = 0;
  std::size_t failures_left_ = 0;
};

}  // namespace satgym
