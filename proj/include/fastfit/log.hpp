// Copyright 2026 the FastFit authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace fastfit {

enum class LogLevel { error = 0, info = 1, debug = 2 };

// Level comes from FASTFIT_LOG ({error, info, debug}); unset or unknown
// values fall back to error so tools stay quiet by default.
inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("FASTFIT_LOG");
    if (env == nullptr) return LogLevel::error;
    if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
    if (std::strcmp(env, "info") == 0) return LogLevel::info;
    return LogLevel::error;
  }();
  return level;
}

inline void log_line(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  const char* tag = level == LogLevel::debug ? "debug" : level == LogLevel::info ? "info" : "error";
  std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}

inline void log_info(const std::string& msg) { log_line(LogLevel::info, msg); }
inline void log_debug(const std::string& msg) { log_line(LogLevel::debug, msg); }
inline void log_error(const std::string& msg) { log_line(LogLevel::error, msg); }

}  // namespace fastfit
