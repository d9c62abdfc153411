// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace tulip::cli {

enum ExitCode : int {
    ok = 0,
    input_error = 1,
    agent_failure = 2,
};

/// Entry point of the `tulip` executable. `in` feeds the chat REPL.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

} // namespace tulip::cli
