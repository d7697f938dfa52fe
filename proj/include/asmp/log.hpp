#pragma once

#include <cstdarg>
#include <cstdio>

namespace asmp::log {

enum class Level { silent = 0, error = 1, warn = 2, info = 3, debug = 4 };

/// Current verbosity, read once from the ASMP_LOG environment variable
/// (silent|error|warn|info|debug). Defaults to warn.
Level level();

namespace detail {
inline void vlog(Level lvl, const char* tag, const char* fmt, va_list args) {
    if (level() < lvl) return;
    std::fprintf(stderr, "[asmp %s] ", tag);
    std::vfprintf(stderr, fmt, args);
    std::fprintf(stderr, "\n");
}
}  // namespace detail

inline void error(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    detail::vlog(Level::error, "error", fmt, args);
    va_end(args);
}

inline void warn(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    detail::vlog(Level::warn, "warn", fmt, args);
    va_end(args);
}

inline void info(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    detail::vlog(Level::info, "info", fmt, args);
    va_end(args);
}

inline void debug(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    detail::vlog(Level::debug, "debug", fmt, args);
    va_end(args);
}

}  // namespace asmp::log
