#include "nlpflow/log.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace nlpflow::log {

namespace {

Level from_env() {
  const char* env = std::getenv("NLPFLOW_LOG");
  if (env == nullptr) return Level::quiet;
  const std::string value(env);
  if (value == "info") return Level::info;
  if (value == "trace") return Level::trace;
  return Level::quiet;
}

std::atomic<int>& current() {
  static std::atomic<int> lvl{static_cast<int>(from_env())};
  return lvl;
}

}  // namespace

Level level() { return static_cast<Level>(current().load(std::memory_order_relaxed)); }

void set_level(Level lvl) { current().store(static_cast<int>(lvl), std::memory_order_relaxed); }

void write(Level lvl, std::string_view message) {
  const char* tag = lvl == Level::trace ? "trace" : "info";
  std::fprintf(stderr, "[nlpflow %s] %.*s\n", tag, static_cast<int>(message.size()), message.data());
}

}  // namespace nlpflow::log
