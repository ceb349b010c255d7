#include "vagsim/common/log.hpp"

#include <iostream>
#include <mutex>

namespace vagsim {

namespace {

std::mutex g_mutex;
LogLevel g_level = LogLevel::warn;
std::function<void(LogLevel, const std::string&)> g_sink;

const char* level_name(LogLevel l)
{
    switch (l) {
    case LogLevel::debug: return "debug";
    case LogLevel::info: return "info";
    case LogLevel::warn: return "warning";
    case LogLevel::error: return "error";
    }
    return "?";
}

} // namespace

void set_log_sink(std::function<void(LogLevel, const std::string&)> sink)
{
    std::lock_guard lock(g_mutex);
    g_sink = std::move(sink);
}

void set_log_level(LogLevel min_level)
{
    std::lock_guard lock(g_mutex);
    g_level = min_level;
}

void log(LogLevel level, const std::string& message)
{
    std::lock_guard lock(g_mutex);
    if (level < g_level) return;
    if (g_sink) g_sink(level, message);
    else std::cerr << "vagsim " << level_name(level) << ": " << message << '\n';
}

} // namespace vagsim
