#ifndef MULTIACC_LOG_HPP
#define MULTIACC_LOG_HPP

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace multiacc {

enum class LogLevel { off = 0, info = 1, debug = 2 };

// Level comes from the MULTIACC_LOG environment variable: off|info|debug.
inline LogLevel log_level() {
    static const LogLevel level = [] {
        const char* v = std::getenv("MULTIACC_LOG");
        if (v == nullptr) return LogLevel::off;
        if (std::strcmp(v, "debug") == 0) return LogLevel::debug;
        if (std::strcmp(v, "info") == 0) return LogLevel::info;
        return LogLevel::off;
    }();
    return level;
}

template <typename... Args>
void log_info(const char* fmt, Args... args) {
    if (log_level() >= LogLevel::info) {
        std::fprintf(stderr, "[multiacc] ");
        std::fprintf(stderr, fmt, args...);
        std::fprintf(stderr, "\n");
    }
}

template <typename... Args>
void log_debug(const char* fmt, Args... args) {
    if (log_level() >= LogLevel::debug) {
        std::fprintf(stderr, "[multiacc:debug] ");
        std::fprintf(stderr, fmt, args...);
        std::fprintf(stderr, "\n");
    }
}

}  // namespace multiacc

#endif
