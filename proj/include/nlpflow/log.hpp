#pragma once

#include <string_view>
#include <utility>

#include <fmt/format.h>

namespace nlpflow::log {

enum class Level { quiet = 0, info = 1, trace = 2 };

/// Read once from NLPFLOW_LOG (quiet | info | trace); unset or unknown means quiet.
Level level();
void set_level(Level lvl);
void write(Level lvl, std::string_view message);

template <class... Args>
void info(fmt::format_string<Args...> f, Args&&... args) {
  if (level() >= Level::info) write(Level::info, fmt::format(f, std::forward<Args>(args)...));
}

template <class... Args>
void trace(fmt::format_string<Args...> f, Args&&... args) {
  if (level() >= Level::trace) write(Level::trace, fmt::format(f, std::forward<Args>(args)...));
}

}  // namespace nlpflow::log
