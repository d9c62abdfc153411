// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

namespace tulip::detail {

struct ProcessResult {
    int exit_code = -1;
    bool timed_out = false;
    std::string out;
    std::string err;
};

/// Spawns `argv` (PATH lookup on argv[0]), feeds `input` to stdin, and
/// collects stdout/stderr until exit or `timeout`, after which the child is
/// killed. Throws Error(NotExecutable) when the process cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, std::string_view input,
                          std::chrono::milliseconds timeout);

} // namespace tulip::detail
