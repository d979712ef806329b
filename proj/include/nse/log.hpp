#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace nse {

// Process-wide log level, read once from NSE_LOG (error|warn|info|debug).
// Messages go to stderr so CLI status JSON on stdout stays machine-readable.
enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

inline LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("NSE_LOG");
    if (!env) return LogLevel::warn;
    if (std::strcmp(env, "error") == 0) return LogLevel::error;
    if (std::strcmp(env, "warn") == 0) return LogLevel::warn;
    if (std::strcmp(env, "info") == 0) return LogLevel::info;
    if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
    return LogLevel::warn;
  }();
  return level;
}

inline void log_msg(LogLevel lvl, const std::string& msg) {
  if (lvl > log_level()) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(lvl)], msg.c_str());
}

inline void log_error(const std::string& msg) { log_msg(LogLevel::error, msg); }
inline void log_warn(const std::string& msg) { log_msg(LogLevel::warn, msg); }
inline void log_info(const std::string& msg) { log_msg(LogLevel::info, msg); }
inline void log_debug(const std::string& msg) { log_msg(LogLevel::debug, msg); }

}  // namespace nse
