#include "t2v/log.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

namespace t2v::log {
namespace {

std::atomic<Level> g_level{Level::info};
std::mutex g_mutex;

std::string_view name(Level l) {
  switch (l) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
  }
  return "info";
}

}  // namespace

void set_level(Level l) { g_level.store(l); }
Level level() { return g_level.load(); }

void write(Level l, std::string_view component, std::string_view message) {
  std::lock_guard lock(g_mutex);
  fmt::print(stderr, "level={} component={} msg=\"{}\"\n", name(l), component, message);
}

}  // namespace t2v::log
