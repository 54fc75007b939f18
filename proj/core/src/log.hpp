#pragma once

#include <string>

namespace trajbench::detail {

void warn(const std::string& message);
/// Emits `message` only the first time `key` is seen in this process.
void warn_once(const std::string& key, const std::string& message);

}  // namespace trajbench::detail
