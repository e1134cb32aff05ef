#pragma once

#include <string>

namespace offsetmodel::log {

enum class Level : int { error = 0, info = 1, debug = 2 };

// Threshold from OFFSET_MODEL_LOG (error|info|debug), read once; defaults
// to error.
Level threshold();

void write(Level level, const std::string& message);

inline void error(const std::string& m) { write(Level::error, m); }
inline void info(const std::string& m) { write(Level::info, m); }
inline void debug(const std::string& m) { write(Level::debug, m); }

} // namespace offsetmodel::log
