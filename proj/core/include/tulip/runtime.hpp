// SPDX-License-Identifier: Apache-2.0
//
// Tool executor. Native tools are host callables registered against a
// descriptor; file tools run in a subprocess that speaks one JSON line in and
// one JSON line out:
//
//   argv:   <command...> <tdf_path> <function_name>
//   stdin:  {"arguments": {...}}
//   stdout: {"result": <value>}  or  {"error": "<text>"}
//
// Validation mode is `<command...> --check <tdf_path>`, exit status 0 on
// success, diagnostics on stdout otherwise.
#pragma once

#include "tulip/error.hpp"
#include "tulip/json.hpp"
#include "tulip/tool_call.hpp"
#include "tulip/toollib.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <shared_mutex>
#include <string>
#include <vector>

namespace tulip {

struct InterpreterConfig {
    std::vector<std::string> command;
    std::chrono::milliseconds timeout{10'000};
    bool enabled = false;

    /// `TULIP_INTERPRETER` (whitespace-separated argv) replaces `command` and
    /// enables the interpreter.
    static InterpreterConfig from_env(InterpreterConfig base);
    static InterpreterConfig from_env();
};

struct NativeTool {
    std::vector<ParamKind> kinds;
    /// Receives validated arguments keyed by parameter name.
    std::function<Json(const Json& arguments)> fn;
};

struct Diagnostic {
    Errc code = Errc::SyntaxError;
    int line = 0;
    std::string message;
};

class Runtime {
public:
    Runtime(const ToolLibrary& library, InterpreterConfig interpreter = {});

    /// Throws DuplicateRegistration, or SignatureMismatch when `tool.kinds`
    /// disagrees with the descriptor's parameter list.
    void register_native(const ToolDescriptor& descriptor, NativeTool tool);
    bool has_native(const std::string& qualified_id) const;

    /// Total: every failure becomes a ToolResult error.
    ToolResult execute(const ToolCall& call) const;

    /// Tool-definition parse plus, when an interpreter is enabled, its check
    /// mode. Empty on success.
    std::vector<Diagnostic> validate_source(std::string_view source_text) const;

    const InterpreterConfig& interpreter() const noexcept { return interpreter_; }

private:
    ToolResult run_file(const ToolCall& call, const ToolEntry& entry, const Json& arguments) const;

    const ToolLibrary& library_;
    InterpreterConfig interpreter_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, NativeTool> natives_;
};

/// Checks `arguments` against the descriptor and returns them with integral
/// floats coerced to integers where an integer is declared. Throws
/// Error(ArgumentError) naming the offending parameter.
Json validate_arguments(const ToolDescriptor& descriptor, const Json& arguments);

} // namespace tulip
