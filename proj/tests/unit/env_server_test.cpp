#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "json.hpp"
#include "satgym/env_server.hpp"
#include "satgym/line_io.hpp"
#include "satgym/tptp.hpp"
#include "support/problems.hpp"

using namespace satgym;
using satgym::testing::problem_file;
using json = nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
  for (std::size_t at = text.find(from); at != std::string::npos; at = text.find(from, at)) {
    text.replace(at, from.size(), to);
    at += to.size();
  }
  return text;
}

std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(SATGYM_FIXTURES_DIR) / "env_serve" / name;
}

json call(EnvServer& server, const json& command) {
  return json::parse(server.handle(command.dump()));
}

std::atomic<std::uint16_t> listening_port{0};
void remember_port(std::uint16_t port) { listening_port = port; }

}  // namespace

TEST_CASE("env_serve: golden script reproduces the golden transcript") {
  const std::string script =
      replace_all(read_file(fixture("script.jsonl")), "${DATA}", SATGYM_DATA_DIR);
  std::istringstream in(script);
  std::ostringstream out;
  const int code = serve_env(in, out);
  CHECK(code == 2);
  CHECK(out.str() == read_file(fixture("expected.jsonl")));
}

TEST_CASE("env_serve: reset observation round-trips against the environment") {
  for (const auto& name : satgym::testing::bundled_problems()) {
    CAPTURE(name);
    EnvServer server;
    REQUIRE(call(server, {{"cmd", "make"}, {"problem", problem_file(name).string()},
                          {"max_clauses", 50}})["ok"] == true);
    Environment env(EnvConfig{50, problem_file(name)});
    env.reset(3);
    json reply = call(server, {{"cmd", "reset"}, {"seed", 3}});
    std::mt19937_64 rng(4);
    for (int step = 0; step < 6; ++step) {
      REQUIRE(reply["ok"] == true);
      CHECK(reply["info"] == json::object());
      const json& observation = reply["observation"];
      const Observation expected = env.observation();
      CHECK(observation["action_mask"].get<std::vector<double>>() == expected.action_mask);

      std::string text;
      for (const auto& line : observation["real_obs"]) text += line.get<std::string>() + "\n";
      const Problem parsed = parse_problem(text);
      REQUIRE(parsed.clauses.size() == expected.real_obs.size());
      for (std::size_t i = 0; i < parsed.clauses.size(); ++i) {
        const Clause& a = parsed.clauses[i];
        const Clause& b = *expected.real_obs[i];
        CHECK(a.label() == b.label());
        CHECK(a.role() == b.role());
        CHECK(a.literals() == b.literals());
        CHECK(a.inference_parents() == b.inference_parents());
      }
      if (!env.has_selectable() || env.episode_over()) break;
      std::vector<std::size_t> live;
      for (std::size_t i = 0; i < expected.action_mask.size(); ++i) {
        if (expected.action_mask[i] == 1.0) live.push_back(i);
      }
      const std::size_t action = live[rng() % live.size()];
      const auto outcome = env.step(action);
      reply = call(server, {{"cmd", "step"}, {"action", action}});
      CHECK(reply["reward"] == outcome.reward);
      CHECK(reply["terminated"] == outcome.terminated);
      CHECK(reply["truncated"] == outcome.truncated);
      if (outcome.terminated || outcome.truncated) break;
    }
  }
}

TEST_CASE("env_serve: invalid action leaves the state unchanged") {
  EnvServer server;
  call(server, {{"cmd", "make"}, {"problem", problem_file("bandit-separation.p").string()}});
  call(server, {{"cmd", "reset"}});
  call(server, {{"cmd", "step"}, {"action", 2}});
  const json before = call(server, {{"cmd", "render"}, {"mode", "ansi"}});
  const json error = call(server, {{"cmd", "step"}, {"action", 2}, {"id", "x"}});
  CHECK(error["ok"] == false);
  CHECK(error["id"] == "x");
  CHECK(error["error"]["type"] == "InvalidAction");
  CHECK_FALSE(error.contains("fatal"));
  CHECK(call(server, {{"cmd", "render"}, {"mode", "ansi"}}) == before);
  CHECK(call(server, {{"cmd", "step"}, {"action", 3}})["reward"] == 1.0);
}

TEST_CASE("env_serve: malformed input keeps the server alive") {
  EnvServer server;
  for (const char* line : {"", "{", "[1,2]", "42", "{\"cmd\":7}", "{\"nocmd\":true}",
                           "{\"cmd\":\"make\",\"max_clauses\":0}",
                           "{\"cmd\":\"make\",\"max_clauses\":\"many\"}",
                           "{\"cmd\":\"make\",\"backend\":\"vampire\"}",
                           "{\"cmd\":\"make\",\"problem\":\"/no/such/file.p\"}"}) {
    CAPTURE(line);
    const json reply = json::parse(server.handle(line));
    CHECK(reply["ok"] == false);
    CHECK_FALSE(server.fatal());
  }
  CHECK(call(server, {{"cmd", "make"}, {"max_clauses", 30}})["max_clauses"] == 30);
  CHECK(call(server, {{"cmd", "set_task"}, {"problem", "/no/such/file.p"}})["ok"] == false);
  CHECK(call(server, {{"cmd", "reset"}, {"seed", -2}})["error"]["type"] == "BadCommand");
  CHECK(call(server, {{"cmd", "reset"}})["ok"] == true);
}

TEST_CASE("env_serve: step after close is fatal") {
  EnvServer server;
  call(server, {{"cmd", "make"}});
  call(server, {{"cmd", "close"}});
  const json reply = call(server, {{"cmd", "step"}, {"action", 0}});
  CHECK(reply["fatal"] == true);
  CHECK(reply["error"]["type"] == "EnvironmentClosed");
  CHECK(server.fatal());
}

TEST_CASE("env_serve: tcp transport") {
  listening_port = 0;
  int code = -1;
  std::thread server([&] { code = serve_env_socket("127.0.0.1", 0, {}, remember_port); });
  while (listening_port == 0) std::this_thread::sleep_for(std::chrono::milliseconds(1));

  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in address{};
  address.sin_family = AF_INET;
  address.sin_port = htons(listening_port);
  ::inet_pton(AF_INET, "127.0.0.1", &address.sin_addr);
  REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&address), sizeof address) == 0);
  LineReader reader(fd);
  const std::string make =
      json{{"cmd", "make"}, {"problem", problem_file("p-not-p.p").string()}, {"max_clauses", 3}}
          .dump();
  REQUIRE(write_all(fd, make + "\n{\"cmd\":\"reset\"}\n{\"cmd\":\"step\",\"action\":1}\n"));
  CHECK(json::parse(*reader.read_line(std::chrono::milliseconds(5000)))["ok"] == true);
  const json reset = json::parse(*reader.read_line(std::chrono::milliseconds(5000)));
  CHECK(reset["observation"]["action_mask"] == json::array({1.0, 1.0, 0.0}));
  CHECK(json::parse(*reader.read_line(std::chrono::milliseconds(5000)))["ok"] == true);
  ::close(fd);
  server.join();
  CHECK(code == 0);
}
