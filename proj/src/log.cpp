#include "entangled/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace entangled::log {
namespace {

Level from_env() {
  const char* raw = std::getenv("ENTANGLED_GRAPHS_LOG");
  if (raw == nullptr) {
    return Level::Warn;
  }
  const std::string v(raw);
  if (v == "error") return Level::Error;
  if (v == "info") return Level::Info;
  if (v == "debug") return Level::Debug;
  return Level::Warn;
}

std::atomic<int>& current() {
  static std::atomic<int> level{static_cast<int>(from_env())};
  return level;
}

const char* tag(Level level) {
  switch (level) {
    case Level::Error: return "error";
    case Level::Warn: return "warn";
    case Level::Info: return "info";
    case Level::Debug: return "debug";
  }
  return "?";
}

}  // namespace

Level threshold() { return static_cast<Level>(current().load()); }

void set_threshold(Level level) { current().store(static_cast<int>(level)); }

void write(Level level, std::string_view message) {
  if (static_cast<int>(level) > current().load()) {
    return;
  }
  static std::mutex mutex;
  std::lock_guard lock(mutex);
  std::cerr << "[" << tag(level) << "] " << message << '\n';
}

}  // namespace entangled::log
