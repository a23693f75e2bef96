#pragma once

#include <fmt/format.h>

#include <string_view>

namespace t2v::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3 };

void set_level(Level level);
Level level();

void write(Level level, std::string_view component, std::string_view message);

// Structured key=value lines on stderr, e.g. "level=warn component=ingest msg=...".
template <typename... Args>
void info(std::string_view component, fmt::format_string<Args...> f, Args&&... args) {
  if (level() <= Level::info) write(Level::info, component, fmt::format(f, std::forward<Args>(args)...));
}

template <typename... Args>
void warn(std::string_view component, fmt::format_string<Args...> f, Args&&... args) {
  if (level() <= Level::warn) write(Level::warn, component, fmt::format(f, std::forward<Args>(args)...));
}

template <typename... Args>
void debug(std::string_view component, fmt::format_string<Args...> f, Args&&... args) {
  if (level() <= Level::debug) write(Level::debug, component, fmt::format(f, std::forward<Args>(args)...));
}

}  // namespace t2v::log
