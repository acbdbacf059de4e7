// satgym: command-line front end.
//
//   satgym run --agent thompson --problem data/problems/bandit-separation.p
//              --max-clauses 15 --episodes 500 --seed 1 --out thompson.jsonl
//   satgym serve-env [--transport stdio|tcp --port N]
//   satgym serve-stub-embedder --port 8765
//   satgym relay --port N --problem FILE
//
// Exit codes: 0 success, 1 invalid arguments or configuration, 2 runtime
// failure.

#include <unistd.h>

#include <chrono>
#include <climits>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "satgym/embedding.hpp"
#include "satgym/env_server.hpp"
#include "satgym/error.hpp"
#include "satgym/log.hpp"
#include "satgym/relay.hpp"
#include "satgym/runner.hpp"
#include "satgym/tptp.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

std::vector<std::string> split_command(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> parts;
  for (std::string part; in >> part;) parts.push_back(part);
  return parts;
}

std::string self_executable() {
  char buffer[PATH_MAX];
  const ssize_t length = ::readlink("/proc/self/exe", buffer, sizeof buffer - 1);
  if (length <= 0) return "satgym";
  return std::string(buffer, static_cast<std::size_t>(length));
}

struct BackendFlags {
  std::string kind = "embedded";
  std::string prover_command;
  std::uint16_t relay_port = 0;
  int timeout_ms = 10000;

  void add_to(CLI::App* app) {
    app->add_option("--backend", kind, "Prover backend")
        ->check(CLI::IsMember({"embedded", "stdio", "relay"}))
        ->capture_default_str();
    app->add_option("--prover-cmd", prover_command,
                    "Prover command line; {problem} (and for relay {host}, {port}) are "
                    "substituted. Relay default: this program's relay subcommand");
    app->add_option("--relay-port", relay_port, "Relay listening port (0 picks one)");
    app->add_option("--timeout-ms", timeout_ms, "Backend read timeout")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  satgym::BackendSpec spec() const {
    satgym::BackendSpec spec;
    spec.kind = kind;
    spec.prover_command = split_command(prover_command);
    if (kind == "relay" && spec.prover_command.empty()) {
      spec.prover_command = {self_executable(), "relay",    "--host", "{host}",
                             "--port",          "{port}",   "--problem", "{problem}"};
    }
    spec.relay_port = relay_port;
    spec.timeout = std::chrono::milliseconds(timeout_ms);
    return spec;
  }
};

satgym::LogLevel parse_level(const std::string& name) {
  if (name == "debug") return satgym::LogLevel::kDebug;
  if (name == "info") return satgym::LogLevel::kInfo;
  if (name == "warning") return satgym::LogLevel::kWarning;
  if (name == "error") return satgym::LogLevel::kError;
  return satgym::LogLevel::kOff;
}

int run_command(const satgym::ExperimentConfig& config, const std::string& out_path) {
  satgym::validate(config);
  const auto started = std::chrono::steady_clock::now();
  satgym::ExperimentSummary summary;
  if (out_path.empty() || out_path == "-") {
    summary = satgym::run_experiment(config, std::cout);
  } else {
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw satgym::ValidationError("cannot write " + out_path);
    summary = satgym::run_experiment(config, out);
    if (!out) throw satgym::Error("write to " + out_path + " failed");
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
  std::fprintf(stderr, "%zu episodes, %zu steps, mean reward %.3f, last-%zu mean %.3f, %.2f s\n",
               summary.episodes, summary.total_steps, summary.mean_reward, config.window,
               summary.window_mean_reward, elapsed.count());
  return 0;
}

void announce_port(std::uint16_t port) {
  std::fprintf(stderr, "listening on port %u\n", static_cast<unsigned>(port));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prover-guidance reinforcement learning environment"};
  app.require_subcommand(1);
  std::string log_level = "warning";
  app.add_option("--log-level", log_level, "debug, info, warning, error or off")
      ->check(CLI::IsMember({"debug", "info", "warning", "error", "off"}))
      ->capture_default_str();

  // run
  auto* run = app.add_subcommand("run", "Run an agent for a number of episodes");
  satgym::ExperimentConfig config;
  BackendFlags run_backend;
  std::string problem;
  std::string out_path;
  run->add_option("--agent", config.agent, "random or thompson")->capture_default_str();
  run_backend.add_to(run);
  run->add_option("--problem", problem, "TPTP CNF problem (default: bundled group theory task)");
  run->add_option("--max-clauses", config.max_clauses, "Clause budget")->capture_default_str();
  run->add_option("--episodes", config.episodes, "Episode count")->capture_default_str();
  run->add_option("--seed", config.seed, "Master seed")->capture_default_str();
  run->add_option("--wrapper", config.wrapper,
                  "none or bandit (default: bandit for thompson, none for random)");
  run->add_option("--max-steps", config.max_steps, "Per-episode step limit (0: none)")
      ->capture_default_str();
  run->add_option("--window", config.window, "Episodes in the trailing mean")
      ->capture_default_str();
  run->add_option("--out", out_path, "Statistics file (default: standard output)");

  // serve-env
  auto* serve_env = app.add_subcommand("serve-env", "Serve one environment over JSON lines");
  BackendFlags env_backend;
  std::string transport = "stdio";
  std::string env_host = "127.0.0.1";
  std::uint16_t env_port = 0;
  serve_env->add_option("--transport", transport, "stdio or tcp")
      ->check(CLI::IsMember({"stdio", "tcp"}))
      ->capture_default_str();
  serve_env->add_option("--host", env_host, "tcp: address to bind")->capture_default_str();
  serve_env->add_option("--port", env_port, "tcp: port (0 picks one)")->capture_default_str();
  env_backend.add_to(serve_env);

  // serve-stub-embedder
  auto* serve_stub = app.add_subcommand("serve-stub-embedder", "Serve stub embeddings over HTTP");
  std::uint16_t stub_port = 8765;
  std::string stub_host = "127.0.0.1";
  std::size_t stub_dimension = satgym::kDefaultEmbeddingDimension;
  serve_stub->add_option("--port", stub_port, "Port (0 picks one)")->capture_default_str();
  serve_stub->add_option("--host", stub_host, "Address to bind")->capture_default_str();
  serve_stub->add_option("--dimension", stub_dimension, "Vector length")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  // relay
  auto* relay = app.add_subcommand(
      "relay", "Run the built-in prover as a relay client for one episode");
  std::string relay_host = "127.0.0.1";
  std::uint16_t relay_port = 0;
  std::string relay_problem;
  relay->add_option("--host", relay_host, "Relay server address")->capture_default_str();
  relay->add_option("--port", relay_port, "Relay server port")->required();
  relay->add_option("--problem", relay_problem,
                    "TPTP CNF problem (default: bundled group theory task)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  satgym::set_log_level(parse_level(log_level));
  try {
    if (*run) {
      config.backend = run_backend.spec();
      if (!problem.empty()) config.problem = problem;
      return run_command(config, out_path);
    }
    if (*serve_env) {
      const auto spec = env_backend.spec();
      if (transport == "tcp") {
        return satgym::serve_env_socket(env_host, env_port, spec, announce_port);
      }
      std::ios::sync_with_stdio(false);
      return satgym::serve_env(std::cin, std::cout, spec);
    }
    if (*serve_stub) {
      satgym::StubEmbeddingService service(stub_dimension, stub_host, stub_port);
      std::fprintf(stderr, "serving %s\n", service.url().c_str());
      service.serve();
      return 0;
    }
    if (*relay) {
      const satgym::Problem task = relay_problem.empty() ? satgym::default_problem()
                                                         : satgym::load_problem(relay_problem);
      satgym::run_relay_prover(relay_host, relay_port, task);
      return 0;
    }
  } catch (const satgym::ValidationError& e) {
    std::fprintf(stderr, "satgym: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "satgym: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
