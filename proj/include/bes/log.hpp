#pragma once

// Minimal stderr logger. Level comes from BES_LOG_LEVEL
// (error|warn|info|debug), default warn.

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace bes::log {

enum class Level : int { error = 0, warn = 1, info = 2, debug = 3 };

inline Level& level() {
    static Level lv = [] {
        const char* env = std::getenv("BES_LOG_LEVEL");
        if (!env) return Level::warn;
        if (std::strcmp(env, "error") == 0) return Level::error;
        if (std::strcmp(env, "warn") == 0) return Level::warn;
        if (std::strcmp(env, "info") == 0) return Level::info;
        if (std::strcmp(env, "debug") == 0) return Level::debug;
        return Level::warn;
    }();
    return lv;
}

inline void vlog(Level lv, const char* tag, const char* fmt, va_list args) {
    if (static_cast<int>(lv) > static_cast<int>(level())) return;
    std::fprintf(stderr, "[bes:%s] ", tag);
    std::vfprintf(stderr, fmt, args);
    std::fputc('\n', stderr);
}

#if defined(__GNUC__) || defined(__clang__)
#define BES_PRINTF_ATTR __attribute__((format(printf, 1, 2)))
#else
#define BES_PRINTF_ATTR
#endif

inline void error(const char* fmt, ...) BES_PRINTF_ATTR;
inline void warn(const char* fmt, ...) BES_PRINTF_ATTR;
inline void info(const char* fmt, ...) BES_PRINTF_ATTR;
inline void debug(const char* fmt, ...) BES_PRINTF_ATTR;

inline void error(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    vlog(Level::error, "error", fmt, args);
    va_end(args);
}

inline void warn(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    vlog(Level::warn, "warn", fmt, args);
    va_end(args);
}

inline void info(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    vlog(Level::info, "info", fmt, args);
    va_end(args);
}

inline void debug(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    vlog(Level::debug, "debug", fmt, args);
    va_end(args);
}

#undef BES_PRINTF_ATTR

} // namespace bes::log
