// SPDX-License-Identifier: Apache-2.0

#include "dmc/util/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>

namespace dmc::util {

namespace {

LogLevel initial_level() {
    LogLevel lvl = LogLevel::Warn;
    if (const char* env = std::getenv("DMC_LOG")) parse_log_level(env, lvl);
    return lvl;
}

std::atomic<int>& level_slot() {
    static std::atomic<int> slot{static_cast<int>(initial_level())};
    return slot;
}

}  // namespace

LogLevel log_level() { return static_cast<LogLevel>(level_slot().load()); }

void set_log_level(LogLevel level) { level_slot().store(static_cast<int>(level)); }

bool parse_log_level(std::string_view name, LogLevel& out) {
    if (name == "error") out = LogLevel::Error;
    else if (name == "warn") out = LogLevel::Warn;
    else if (name == "info") out = LogLevel::Info;
    else if (name == "debug") out = LogLevel::Debug;
    else return false;
    return true;
}

void log(LogLevel level, std::string_view message) {
    if (static_cast<int>(level) > level_slot().load()) return;
    static std::mutex mu;
    static constexpr const char* names[] = {"error", "warn", "info", "debug"};
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << "[" << names[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace dmc::util
