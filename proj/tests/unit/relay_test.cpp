#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "satgym/blocking_queue.hpp"
#include "satgym/environment.hpp"
#include "satgym/error.hpp"
#include "satgym/line_io.hpp"
#include "satgym/relay.hpp"
#include "support/oracles.hpp"
#include "support/problems.hpp"
#include "support/semantics.hpp"

using namespace satgym;
using namespace std::chrono_literals;
using satgym::testing::problem_file;

namespace {

RelayBackendConfig double_config(std::vector<std::string> extra = {}) {
  RelayBackendConfig config;
  config.server.accept_timeout = 5000ms;
  config.prover_command = {SATGYM_PROVER_DOUBLE, "relay", "{host}", "{port}", "{problem}"};
  for (auto& arg : extra) config.prover_command.push_back(std::move(arg));
  return config;
}

int raw_connect(std::uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in address{};
  address.sin_family = AF_INET;
  address.sin_port = htons(port);
  address.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&address), sizeof address) == 0);
  return fd;
}

}  // namespace

TEST_SUITE("external-adapters") {

TEST_CASE("relay codec: round trip and malformed records") {
  const JsonLinesCodec codec;
  const RelayMessage message{RelayMessage::Kind::kRequest, 42,
                             {{"clauses", {"cnf(a, axiom, p(X))."}}, {"status", "running"}}};
  const std::string line = codec.encode(message);
  CHECK(line.find('\n') == std::string::npos);
  CHECK(codec.decode(line) == message);
  CHECK(codec.decode(R"({"kind":"response","tag":3,"payload":{"given":"c_1"}})") ==
        RelayMessage{RelayMessage::Kind::kResponse, 3, {{"given", "c_1"}}});
  CHECK_THROWS_AS(codec.decode("{"), ProtocolError);
  CHECK_THROWS_AS(codec.decode(R"({"kind":"ask","tag":1})"), ProtocolError);
  CHECK_THROWS_AS(codec.decode(R"({"kind":"request","tag":-1})"), ProtocolError);
  CHECK_THROWS_AS(codec.decode(R"({"kind":"request"})"), ProtocolError);
}

TEST_CASE("relay payload: select results round trip") {
  SelectResult result;
  result.new_clauses = {Clause::from_text("c_1", "plain", "p(X) | ~q(f(X))", "resolution",
                                          {"a1", "a2"}),
                        Clause::from_text("c_2", "plain", "$false", "resolution", {"c_1", "a3"})};
  result.eliminated_labels = {"a2"};
  result.status = ProverStatus::kRefutation;
  const SelectResult back = decode_select_result(encode_select_result(result));
  CHECK(back.new_clauses == result.new_clauses);
  CHECK(back.eliminated_labels == result.eliminated_labels);
  CHECK(back.status == result.status);
  CHECK_THROWS_AS(decode_select_result({{"clauses", {"not a clause"}}}), ProtocolError);
  CHECK_THROWS_AS(decode_select_result({{"clauses", {}}, {"status", "done"}}), ProtocolError);
  CHECK_THROWS_AS(decode_select_result({{"status", "running"}}), ProtocolError);
}

TEST_CASE("blocking queue: concurrent producers keep per-producer order") {
  BlockingQueue<std::pair<int, int>> queue;
  constexpr int kProducers = 4;
  constexpr int kEach = 5000;
  std::vector<std::thread> producers;
  for (int p = 0; p < kProducers; ++p) {
    producers.emplace_back([&queue, p] {
      for (int i = 0; i < kEach; ++i) queue.push({p, i});
    });
  }
  std::vector<int> next(kProducers, 0);
  int received = 0;
  bool in_order = true;
  while (received < kProducers * kEach) {
    auto item = queue.pop(2000ms);
    REQUIRE(item.has_value());
    in_order = in_order && item->second == next[item->first];
    ++next[item->first];
    ++received;
  }
  for (auto& t : producers) t.join();
  CHECK(in_order);
  CHECK(queue.size() == 0);
  queue.close();
  CHECK_FALSE(queue.push({0, 0}));
  CHECK_FALSE(queue.pop(10ms).has_value());
}

TEST_CASE("relay server: 1000 echoed requests arrive in order") {
  RelayServer server;
  std::vector<std::uint64_t> tags;
  std::vector<std::string> labels;
  std::thread prover([&] {
    RelayClient client("127.0.0.1", server.port());
    for (int i = 0; i < 1000; ++i) {
      const auto tag = client.send_request({{"label", "c_" + std::to_string(i)}});
      const auto response = client.read_response(5000ms);
      tags.push_back(response.tag);
      labels.push_back(response.payload.at("given"));
      if (response.tag != tag) break;
    }
  });
  server.accept_connection(5000ms);
  for (int i = 0; i < 1000; ++i) {
    const auto request = server.next_request(5000ms);
    server.post_response({RelayMessage::Kind::kResponse, request.tag,
                          {{"given", request.payload.at("label")}}});
  }
  prover.join();
  REQUIRE(tags.size() == 1000);
  for (std::size_t i = 0; i < tags.size(); ++i) {
    CHECK(tags[i] == i + 1);
    CHECK(labels[i] == "c_" + std::to_string(i));
  }
}

TEST_CASE("relay server: stale and unknown tags are rejected") {
  RelayServer server;
  RelayClient client("127.0.0.1", server.port());
  server.accept_connection(5000ms);
  client.send_request({{"n", 1}});
  client.send_request({{"n", 2}});
  const auto first = server.next_request(5000ms);
  const auto second = server.next_request(5000ms);
  CHECK_THROWS_AS(server.post_response({RelayMessage::Kind::kResponse, second.tag, {}}),
                  TagMismatchError);
  server.post_response({RelayMessage::Kind::kResponse, first.tag, {{"given", "x"}}});
  CHECK_THROWS_AS(server.post_response({RelayMessage::Kind::kResponse, first.tag, {}}),
                  TagMismatchError);
  server.post_response({RelayMessage::Kind::kResponse, second.tag, {{"given", "y"}}});
  CHECK_THROWS_AS(server.post_response({RelayMessage::Kind::kResponse, 99, {}}),
                  TagMismatchError);
  CHECK(client.read_response(5000ms).payload.at("given") == "x");
  CHECK(client.read_response(5000ms).payload.at("given") == "y");
}

TEST_CASE("relay server: timeouts, disconnects and reconnection") {
  RelayServer server;
  CHECK_THROWS_AS(server.accept_connection(50ms), TimeoutError);
  CHECK_THROWS_AS(server.next_request(10ms), BackendDisconnectedError);
  {
    RelayClient client("127.0.0.1", server.port());
    server.accept_connection(5000ms);
    CHECK(server.connected());
    CHECK_THROWS_AS(server.next_request(20ms), TimeoutError);
    client.send_request({{"n", 1}});
    client.close();
  }
  // Requests received before the disconnect are still delivered.
  CHECK(server.next_request(5000ms).payload.at("n") == 1);
  CHECK_THROWS_AS(server.next_request(5000ms), BackendDisconnectedError);
  CHECK_FALSE(server.connected());

  RelayClient again("127.0.0.1", server.port());
  server.accept_connection(5000ms);
  CHECK(again.send_request({{"n", 2}}) == 1);
  const auto request = server.next_request(5000ms);
  CHECK(request.tag == 1);
  server.post_response({RelayMessage::Kind::kResponse, 1, {{"given", "z"}}});
  CHECK(again.read_response(5000ms).tag == 1);
}

TEST_CASE("relay server: non-increasing request tags drop the connection") {
  RelayServer server;
  const int fd = raw_connect(server.port());
  server.accept_connection(5000ms);
  const JsonLinesCodec codec;
  const std::string first = codec.encode({RelayMessage::Kind::kRequest, 5, {{"n", 1}}});
  const std::string stale = codec.encode({RelayMessage::Kind::kRequest, 5, {{"n", 2}}});
  REQUIRE(write_all(fd, first + "\n" + stale + "\n"));
  CHECK(server.next_request(5000ms).tag == 5);
  CHECK_THROWS_AS(server.next_request(5000ms), BackendDisconnectedError);
  ::close(fd);
}

TEST_CASE("relay server: bind failure") {
  RelayServer first;
  RelayServerOptions options;
  options.port = first.port();
  CHECK_THROWS_AS(RelayServer{options}, Error);
}

TEST_CASE("relay: stress with 10^4 round trips from concurrent producers") {
  // Four prover threads share one connection; a lock keeps each request and
  // its response paired, so the environment sees a single ordered stream.
  RelayServer server;
  constexpr int kProducers = 4;
  constexpr int kEach = 2500;
  std::mutex wire;
  std::vector<std::vector<std::string>> echoed(kProducers);
  std::atomic<int> mismatches{0};
  std::thread prover_side([&] {
    RelayClient client("127.0.0.1", server.port());
    std::vector<std::thread> producers;
    for (int p = 0; p < kProducers; ++p) {
      producers.emplace_back([&, p] {
        for (int i = 0; i < kEach; ++i) {
          std::lock_guard lock(wire);
          const auto tag =
              client.send_request({{"label", std::to_string(p) + ":" + std::to_string(i)}});
          const auto response = client.read_response(10000ms);
          if (response.tag != tag) ++mismatches;
          echoed[p].push_back(response.payload.at("given"));
        }
      });
    }
    for (auto& t : producers) t.join();
  });
  const auto begin = std::chrono::steady_clock::now();
  server.accept_connection(5000ms);
  std::uint64_t last_tag = 0;
  for (int n = 0; n < kProducers * kEach; ++n) {
    const auto request = server.next_request(10000ms);
    if (request.tag != last_tag + 1) ++mismatches;
    last_tag = request.tag;
    server.post_response({RelayMessage::Kind::kResponse, request.tag,
                          {{"given", request.payload.at("label")}}});
  }
  prover_side.join();
  CHECK(std::chrono::steady_clock::now() - begin < 30s);
  CHECK(mismatches == 0);
  for (int p = 0; p < kProducers; ++p) {
    REQUIRE(echoed[p].size() == kEach);
    for (int i = 0; i < kEach; ++i) {
      CHECK(echoed[p][i] == std::to_string(p) + ":" + std::to_string(i));
    }
  }
}

TEST_CASE("relay backend: refutes the default task like the embedded backend") {
  Environment env({}, std::make_unique<RelayBackend>(double_config()));
  const auto run = testing::run_policy(env, testing::lowest_live_index, 500);
  CHECK(run.reward == 1.0);
  CHECK(run.steps == 22);
  Environment reference;
  testing::run_policy(reference, testing::lowest_live_index, 500);
  REQUIRE(env.state().clauses.size() == reference.state().clauses.size());
  for (std::size_t i = 0; i < env.state().clauses.size(); ++i) {
    CHECK(*env.state().clauses[i] == *reference.state().clauses[i]);
  }
}

TEST_CASE("relay backend: prover disconnect ends the episode with reward 0") {
  Environment env({}, std::make_unique<RelayBackend>(double_config({"--die-after", "2"})));
  env.reset();
  StepOutcome outcome;
  std::size_t steps = 0;
  while (!env.episode_over()) {
    outcome = env.step(testing::lowest_live_index(env));
    ++steps;
  }
  CHECK(steps == 3);
  CHECK(outcome.terminated);
  CHECK_FALSE(outcome.truncated);
  CHECK(outcome.reward == 0.0);
  CHECK(outcome.info.empty());
  // A reset starts a fresh prover on a fresh connection.
  auto [obs, info] = env.reset();
  CHECK(obs.real_obs.size() == default_problem().clauses.size());
}

TEST_CASE("relay backend: no prover connects") {
  RelayBackendConfig config;
  config.server.accept_timeout = 50ms;
  RelayBackend backend(config);
  CHECK_THROWS_AS(backend.start(default_problem()), BackendError);
  config.prover_command = {"/nonexistent/iprover", "{port}"};
  RelayBackend missing(config);
  try {
    missing.start(default_problem());
    FAIL("start succeeded");
  } catch (const BackendError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/iprover") != std::string::npos);
  }
}

TEST_CASE("property: environment semantics against the relay double") {
  const auto report = testing::run_semantics_suite(
      [] { return std::make_unique<RelayBackend>(double_config()); }, 300, 99);
  for (const auto& failure : report.failures) FAIL_CHECK(failure);
  CHECK(report.episodes == 300);
  CHECK(report.refutations > 10);
  CHECK(report.truncations > 10);
}

}  // TEST_SUITE
