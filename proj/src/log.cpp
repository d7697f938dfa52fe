#include "asmp/log.hpp"

#include <cstdlib>
#include <cstring>

namespace asmp::log {

static Level parse_level() {
    const char* env = std::getenv("ASMP_LOG");
    if (env == nullptr) return Level::warn;
    if (std::strcmp(env, "silent") == 0) return Level::silent;
    if (std::strcmp(env, "error") == 0) return Level::error;
    if (std::strcmp(env, "warn") == 0) return Level::warn;
    if (std::strcmp(env, "info") == 0) return Level::info;
    if (std::strcmp(env, "debug") == 0) return Level::debug;
    return Level::warn;
}

Level level() {
    static const Level lvl = parse_level();
    return lvl;
}

}  // namespace asmp::log
