#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

namespace dualsplit::harness {

/// Diagnostic verbosity from the DUALSPLIT_LOG environment variable:
/// unset/empty/"off" = silent, "info", "debug".
inline int log_level() {
  static const int level = [] {
    const char* env = std::getenv("DUALSPLIT_LOG");
    if (!env) return 0;
    const std::string v(env);
    if (v == "debug") return 2;
    if (v == "info") return 1;
    return 0;
  }();
  return level;
}

inline void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[dualsplit] " << msg << "\n";
}

inline void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[dualsplit:debug] " << msg << "\n";
}

}  // namespace dualsplit::harness
