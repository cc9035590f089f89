#include "coalesce/log.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace coalesce::log {

Level level() {
  static const Level cached = [] {
    const char* raw = std::getenv("COALESCE_LOG");
    if (raw == nullptr) return Level::Error;
    if (std::strcmp(raw, "info") == 0) return Level::Info;
    if (std::strcmp(raw, "debug") == 0) return Level::Debug;
    return Level::Error;
  }();
  return cached;
}

namespace {

void emit(const char* tag, const std::string& msg) {
  std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}

}  // namespace

void error(const std::string& msg) { emit("error", msg); }

void info(const std::string& msg) {
  if (level() >= Level::Info) emit("info", msg);
}

void debug(const std::string& msg) {
  if (level() >= Level::Debug) emit("debug", msg);
}

}  // namespace coalesce::log
