// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

namespace dmc::util {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Current threshold; initialized from DMC_LOG (error|warn|info|debug),
/// default warn.
LogLevel log_level();
void set_log_level(LogLevel level);
/// Parses a level name; returns false for unknown names.
bool parse_log_level(std::string_view name, LogLevel& out);

/// Writes one line to stderr when `level` passes the threshold.
void log(LogLevel level, std::string_view message);

}  // namespace dmc::util
