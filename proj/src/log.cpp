#include "forge/log.h"

#include <iostream>
#include <mutex>

namespace forge {

namespace {

std::mutex g_mutex;

LogSink& sink() {
    static LogSink s = [](LogLevel level, std::string_view msg) {
        if (level < LogLevel::Info) return;
        static constexpr const char* names[] = {"debug", "info", "warn", "error"};
        std::cerr << "[forge] " << names[static_cast<int>(level)] << ": " << msg << '\n';
    };
    return s;
}

} // namespace

void set_log_sink(LogSink s) {
    std::lock_guard lock(g_mutex);
    sink() = std::move(s);
}

void log(LogLevel level, std::string_view message) {
    std::lock_guard lock(g_mutex);
    if (sink()) sink()(level, message);
}

} // namespace forge
