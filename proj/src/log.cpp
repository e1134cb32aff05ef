#include "offsetmodel/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace offsetmodel::log {

Level threshold() {
    static const Level level = [] {
        const char* env = std::getenv("OFFSET_MODEL_LOG");
        if (env == nullptr) return Level::error;
        if (std::strcmp(env, "debug") == 0) return Level::debug;
        if (std::strcmp(env, "info") == 0) return Level::info;
        return Level::error;
    }();
    return level;
}

void write(Level level, const std::string& message) {
    if (static_cast<int>(level) > static_cast<int>(threshold())) return;
    const char* tag = level == Level::error ? "error" : level == Level::info ? "info" : "debug";
    std::fprintf(stderr, "[%s] %s\n", tag, message.c_str());
}

} // namespace offsetmodel::log
