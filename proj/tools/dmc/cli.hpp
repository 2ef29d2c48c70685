// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace dmc::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kIoError = 3, kNumericalError = 4 };

/// Full command line, argv[0] included. Returns the process exit code.
int run(const std::vector<std::string>& args);

/// Raises glibc's mmap and trim thresholds. Call once at process start.
void tune_allocator();

}  // namespace dmc::cli
