// Copyright 2026 The qmem Authors
// SPDX-License-Identifier: Apache-2.0

#include "qmem/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace qmem {

LogLevel log_level() {
    static LogLevel level = [] {
        const char* env = std::getenv("QMEM_LOG");
        if (!env) return LogLevel::Warn;
        if (!std::strcmp(env, "quiet")) return LogLevel::Quiet;
        if (!std::strcmp(env, "info")) return LogLevel::Info;
        if (!std::strcmp(env, "debug")) return LogLevel::Debug;
        return LogLevel::Warn;
    }();
    return level;
}

namespace {
void emit(LogLevel min, const char* tag, const std::string& message) {
    if (log_level() >= min) std::fprintf(stderr, "[%s] %s\n", tag, message.c_str());
}
}  // namespace

void log_warn(const std::string& message) { emit(LogLevel::Warn, "warn", message); }
void log_info(const std::string& message) { emit(LogLevel::Info, "info", message); }
void log_debug(const std::string& message) { emit(LogLevel::Debug, "debug", message); }

}  // namespace qmem
