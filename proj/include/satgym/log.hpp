#pragma once

#include <string_view>

namespace satgym {

enum class LogLevel { kDebug, kInfo, kWarning, kError, kOff };

// Messages below this level are dropped. Defaults to kWarning, or the value
// of SATGYM_LOG (debug|info|warning|error|off).
void set_log_level(LogLevel level);
LogLevel log_level();

void log(LogLevel level, std::string_view message);
inline void log_info(std::string_view message) { log(LogLevel::kInfo, message); }
inline void log_warning(std::string_view message) { log(LogLevel::kWarning, message); }
inline void log_error(std::string_view message) { log(LogLevel::kError, message); }

}  // namespace satgym
