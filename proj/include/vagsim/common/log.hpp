#pragma once

#include <functional>
#include <string>

namespace vagsim {

enum class LogLevel { debug, info, warn, error };

/// Process-wide message sink; the default writes warnings and errors to stderr.
void set_log_sink(std::function<void(LogLevel, const std::string&)> sink);
void set_log_level(LogLevel min_level);
void log(LogLevel level, const std::string& message);

inline void log_info(const std::string& m) { log(LogLevel::info, m); }
inline void log_warn(const std::string& m) { log(LogLevel::warn, m); }

} // namespace vagsim
