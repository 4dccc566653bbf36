// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace slackdown::slog {

enum class Level : int { Error = 0, Info = 1, Debug = 2 };

// Verbosity comes from SLACKDOWN_LOG={error|info|debug}; default error.
inline Level level() {
  static const Level lvl = [] {
    const char* e = std::getenv("SLACKDOWN_LOG");
    if (e == nullptr) return Level::Error;
    if (std::strcmp(e, "debug") == 0) return Level::Debug;
    if (std::strcmp(e, "info") == 0) return Level::Info;
    return Level::Error;
  }();
  return lvl;
}

inline void write(Level lvl, const char* tag, const std::string& msg) {
  if (static_cast<int>(lvl) <= static_cast<int>(level()))
    std::fprintf(stderr, "slackdown [%s] %s\n", tag, msg.c_str());
}

inline void error(const std::string& msg) { write(Level::Error, "error", msg); }
inline void info(const std::string& msg) { write(Level::Info, "info", msg); }
inline void debug(const std::string& msg) { write(Level::Debug, "debug", msg); }

} // namespace slackdown::slog
