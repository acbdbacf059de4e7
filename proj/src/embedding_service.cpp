#include <cstdlib>

// Request headers and body go out in separate writes; without this each
// round trip waits for a delayed ACK.
#define CPPHTTPLIB_TCP_NODELAY true
#include "httplib.h"
#include "json.hpp"
#include "satgym/embedding.hpp"
#include "satgym/log.hpp"

namespace satgym {
namespace {

// Failures worth another attempt: no connection, or a 5xx status.
class TransientError : public Error {
 public:
  using Error::Error;
};

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

std::string resolve_url(const std::optional<std::string>& configured) {
  if (configured) return *configured;
  if (const char* from_env = std::getenv(kEmbedderUrlVariable); from_env && *from_env) {
    return from_env;
  }
  return kDefaultEmbedderUrl;
}

}  // namespace

HttpEmbedder::HttpEmbedder(HttpEmbedderConfig config)
    : config_(std::move(config)), url_(resolve_url(config_.url)) {
  const std::string scheme = "http://";
  if (url_.rfind(scheme, 0) != 0) {
    throw Error("embedding service URL must start with http://: '" + url_ + "'");
  }
  const auto slash = url_.find('/', scheme.size());
  const std::string origin = slash == std::string::npos ? url_ : url_.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url_.substr(slash);
  if (origin.size() == scheme.size()) throw Error("embedding service URL has no host: '" + url_ + "'");
  client_ = std::make_unique<httplib::Client>(origin);
  client_->set_keep_alive(true);
  client_->set_connection_timeout(config_.request_timeout);
  client_->set_read_timeout(config_.request_timeout);
  client_->set_write_timeout(config_.request_timeout);
}

HttpEmbedder::~HttpEmbedder() = default;

std::vector<double> HttpEmbedder::embed(const std::string& expression) {
  const auto begin = std::chrono::steady_clock::now();
  if (!config_.cache) {
    Vector vector = fetch(expression);
    record(elapsed_ms(begin), false);
    return vector;
  }
  std::promise<Vector> promise;
  std::shared_future<Vector> future;
  bool owner = false;
  {
    std::lock_guard lock(mutex_);
    auto found = cache_.find(expression);
    if (found != cache_.end()) {
      future = found->second;
    } else {
      future = promise.get_future().share();
      cache_.emplace(expression, future);
      owner = true;
    }
  }
  if (owner) {
    try {
      promise.set_value(fetch(expression));
    } catch (...) {
      {
        std::lock_guard lock(mutex_);
        cache_.erase(expression);
      }
      promise.set_exception(std::current_exception());
    }
  }
  Vector vector = future.get();
  record(elapsed_ms(begin), !owner);
  return vector;
}

HttpEmbedder::Vector HttpEmbedder::fetch(const std::string& expression) {
  for (int attempt = 0;; ++attempt) {
    try {
      return fetch_once(expression);
    } catch (const TransientError& e) {
      if (attempt >= config_.retries) {
        throw EmbeddingError("embedding service at " + url_ + " failed after " +
                             std::to_string(attempt + 1) + " attempts: " + e.what());
      }
      log_warning(std::string("embedding request failed, retrying: ") + e.what());
      std::this_thread::sleep_for(config_.backoff_base * (1 << attempt));
    }
  }
}

HttpEmbedder::Vector HttpEmbedder::fetch_once(const std::string& expression) {
  const std::string body = nlohmann::json{{"expression", expression}}.dump();
  httplib::Result result;
  {
    std::lock_guard lock(client_mutex_);
    result = client_->Post(path_, body, "application/json");
  }
  {
    std::lock_guard lock(mutex_);
    ++network_requests_;
  }
  if (!result) throw TransientError(httplib::to_string(result.error()));
  if (result->status >= 500) {
    throw TransientError("status " + std::to_string(result->status));
  }
  if (result->status != 200) {
    throw EmbeddingError("embedding service rejected \"" + expression + "\": status " +
                         std::to_string(result->status) + " " + result->body);
  }
  Vector vector;
  try {
    vector = nlohmann::json::parse(result->body).at("vector").get<Vector>();
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed embedding response: ") + e.what());
  }
  if (vector.size() != config_.dimension) {
    throw ProtocolError("embedding has " + std::to_string(vector.size()) +
                        " values, expected " + std::to_string(config_.dimension));
  }
  return vector;
}

void HttpEmbedder::record(double ms, bool hit) {
  std::lock_guard lock(mutex_);
  ++stats_.count;
  if (hit) {
    ++stats_.hits;
    hit_total_ms_ += ms;
  } else {
    miss_total_ms_ += ms;
  }
  stats_.max_ms = std::max(stats_.max_ms, ms);
  stats_.mean_ms = (hit_total_ms_ + miss_total_ms_) / static_cast<double>(stats_.count);
  stats_.hit_mean_ms = stats_.hits == 0 ? 0.0 : hit_total_ms_ / static_cast<double>(stats_.hits);
  const std::size_t misses = stats_.count - stats_.hits;
  stats_.miss_mean_ms = misses == 0 ? 0.0 : miss_total_ms_ / static_cast<double>(misses);
}

LatencyStats HttpEmbedder::stats() const {
  std::lock_guard lock(mutex_);
  return stats_;
}

std::size_t HttpEmbedder::network_requests() const {
  std::lock_guard lock(mutex_);
  return network_requests_;
}

StubEmbeddingService::StubEmbeddingService(std::size_t dimension, std::string host,
                                           std::uint16_t port)
    : dimension_(dimension), host_(std::move(host)), server_(std::make_unique<httplib::Server>()) {
  server_->Post("/embed", [this](const httplib::Request& request, httplib::Response& response) {
    {
      std::lock_guard lock(mutex_);
      ++requests_;
      if (failures_left_ > 0) {
        --failures_left_;
        response.status = 503;
        response.set_content(R"({"error":"unavailable"})", "application/json");
        return;
      }
    }
    std::string expression;
    try {
      expression = nlohmann::json::parse(request.body).at("expression").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      response.status = 400;
      response.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
      return;
    }
    if (auto problem = validate_expression(expression)) {
      response.status = 400;
      response.set_content(nlohmann::json{{"error", *problem}}.dump(), "application/json");
      return;
    }
    response.set_content(
        nlohmann::json{{"vector", stub_embedding(expression, dimension_)}}.dump(),
        "application/json");
  });
  const int bound = port == 0 ? server_->bind_to_any_port(host_)
                              : (server_->bind_to_port(host_, port) ? port : -1);
  if (bound <= 0) {
    throw Error("cannot listen on " + host_ + ":" + std::to_string(port));
  }
  port_ = static_cast<std::uint16_t>(bound);
}

StubEmbeddingService::~StubEmbeddingService() { stop(); }

std::string StubEmbeddingService::url() const {
  return "http://" + host_ + ":" + std::to_string(port_) + "/embed";
}

std::size_t StubEmbeddingService::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

void StubEmbeddingService::fail_next(std::size_t count) {
  std::lock_guard lock(mutex_);
  failures_left_ = count;
}

void StubEmbeddingService::serve() { server_->listen_after_bind(); }

void StubEmbeddingService::start() {
  if (thread_) return;
  thread_ = std::make_unique<std::thread>([this] { serve(); });
  server_->wait_until_ready();
}

void StubEmbeddingService::stop() {
  server_->stop();
  if (thread_) {
    thread_->join();
    thread_.reset();
  }
}

}  // namespace satgym
