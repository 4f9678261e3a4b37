#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace live {

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

// Verbosity from LIVE_LOG in {error, info, debug}; default error.
inline LogLevel log_level() {
  static LogLevel level = [] {
    const char* env = std::getenv("LIVE_LOG");
    if (env == nullptr) return LogLevel::kError;
    if (std::strcmp(env, "debug") == 0) return LogLevel::kDebug;
    if (std::strcmp(env, "info") == 0) return LogLevel::kInfo;
    return LogLevel::kError;
  }();
  return level;
}

#define LIVE_LOG_AT(lvl, tag, ...)                        \
  do {                                                    \
    if (::live::log_level() >= (lvl)) {                   \
      std::fprintf(stderr, "[live %s] ", tag);            \
      std::fprintf(stderr, __VA_ARGS__);                  \
      std::fprintf(stderr, "\n");                         \
    }                                                     \
  } while (0)

#define LIVE_ERROR(...) LIVE_LOG_AT(::live::LogLevel::kError, "error", __VA_ARGS__)
#define LIVE_INFO(...) LIVE_LOG_AT(::live::LogLevel::kInfo, "info", __VA_ARGS__)
#define LIVE_DEBUG(...) LIVE_LOG_AT(::live::LogLevel::kDebug, "debug", __VA_ARGS__)

}  // namespace live
