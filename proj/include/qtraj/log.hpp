#pragma once

// Minimal leveled logger writing to stderr.

#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <string_view>

namespace qtraj::log {

enum class Level { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3, kOff = 4 };

inline Level& threshold() {
    static Level level = Level::kInfo;
    return level;
}

/// Accepts debug, info, warn, error, off. Returns false on anything else.
inline bool set_level(std::string_view name) {
    if (name == "debug") threshold() = Level::kDebug;
    else if (name == "info") threshold() = Level::kInfo;
    else if (name == "warn") threshold() = Level::kWarn;
    else if (name == "error") threshold() = Level::kError;
    else if (name == "off") threshold() = Level::kOff;
    else return false;
    return true;
}

template <class... Args>
void write(Level level, const Args&... args) {
    if (level < threshold()) return;
    static constexpr const char* kTags[] = {"debug", "info", "warn", "error"};
    std::ostringstream os;
    os << '[' << kTags[static_cast<int>(level)] << "] ";
    (os << ... << args);
    os << '\n';
    static std::mutex mu;
    const std::lock_guard<std::mutex> lock(mu);
    std::cerr << os.str();
}

template <class... Args> void debug(const Args&... a) { write(Level::kDebug, a...); }
template <class... Args> void info(const Args&... a) { write(Level::kInfo, a...); }
template <class... Args> void warn(const Args&... a) { write(Level::kWarn, a...); }
template <class... Args> void error(const Args&... a) { write(Level::kError, a...); }

}  // namespace qtraj::log
