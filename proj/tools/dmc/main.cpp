// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

int main(int argc, char** argv) {
    dmc::cli::tune_allocator();
    return dmc::cli::run(std::vector<std::string>(argv, argv + argc));
}
