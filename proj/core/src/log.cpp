#include "log.hpp"

#include <spdlog/spdlog.h>

#include <mutex>
#include <set>

namespace trajbench::detail {

void warn(const std::string& message) { spdlog::warn("{}", message); }

void warn_once(const std::string& key, const std::string& message) {
  static std::mutex mutex;
  static std::set<std::string> seen;
  {
    std::lock_guard lock(mutex);
    if (!seen.insert(key).second) return;
  }
  spdlog::warn("{}", message);
}

}  // namespace trajbench::detail
