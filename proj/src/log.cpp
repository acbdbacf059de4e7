#include "satgym/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace satgym {
namespace {

LogLevel level_from_env() {
  const char* value = std::getenv("SATGYM_LOG");
  if (value == nullptr) return LogLevel::kWarning;
  const std::string name = value;
  if (name == "debug") return LogLevel::kDebug;
  if (name == "info") return LogLevel::kInfo;
  if (name == "error") return LogLevel::kError;
  if (name == "off") return LogLevel::kOff;
  return LogLevel::kWarning;
}

std::atomic<LogLevel>& current_level() {
  static std::atomic<LogLevel> level{level_from_env()};
  return level;
}

const char* level_name(LogLevel level) {
  switch (level) {
    case LogLevel::kDebug: return "debug";
    case LogLevel::kInfo: return "info";
    case LogLevel::kWarning: return "warning";
    case LogLevel::kError: return "error";
    case LogLevel::kOff: return "off";
  }
  return "?";
}

}  // namespace

void set_log_level(LogLevel level) { current_level().store(level); }

LogLevel log_level() { return current_level().load(); }

void log(LogLevel level, std::string_view message) {
  if (level < log_level() || level == LogLevel::kOff) return;
  static std::mutex mutex;
  std::lock_guard lock(mutex);
  std::cerr << "[satgym " << level_name(level) << "] " << message << '\n';
}

}  // namespace satgym
