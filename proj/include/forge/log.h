#pragma once

#include <functional>
#include <string_view>

namespace forge {

enum class LogLevel { Debug, Info, Warn, Error };

using LogSink = std::function<void(LogLevel, std::string_view)>;

// Replaces the process-wide sink (default: stderr, Info and above).
void set_log_sink(LogSink sink);
void log(LogLevel level, std::string_view message);

inline void log_info(std::string_view m) { log(LogLevel::Info, m); }
inline void log_warn(std::string_view m) { log(LogLevel::Warn, m); }

} // namespace forge
