// Process-wide warning sink for non-fatal numerical conditions.
#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string>

namespace muskat {

using WarningHandler = std::function<void(const std::string&)>;

namespace detail {
inline WarningHandler& warning_handler() {
  static WarningHandler handler = [](const std::string& msg) { std::cerr << "muskat: warning: " << msg << '\n'; };
  return handler;
}
inline std::mutex& warning_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Replaces the warning handler; pass an empty function to silence warnings.
inline void set_warning_handler(WarningHandler h) {
  std::lock_guard lock(detail::warning_mutex());
  detail::warning_handler() = std::move(h);
}

inline void warn(const std::string& msg) {
  std::lock_guard lock(detail::warning_mutex());
  if (detail::warning_handler()) detail::warning_handler()(msg);
}

}  // namespace muskat
